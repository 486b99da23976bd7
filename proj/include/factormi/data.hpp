#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace factormi {

struct EegTrial {
    int n_channels = 0;
    int n_samples = 0;
    std::vector<double> samples;  // row-major channels x samples
    int label = 0;

    double at(int ch, int t) const { return samples[static_cast<size_t>(ch) * n_samples + t]; }
    double& at(int ch, int t) { return samples[static_cast<size_t>(ch) * n_samples + t]; }
};

struct Dataset {
    std::vector<EegTrial> trials;
    std::vector<std::string> class_names;
    double sample_rate_hz = 0.0;  // 0 = unknown
    std::string provenance;

    int n_classes() const { return static_cast<int>(class_names.size()); }
    int n_channels() const { return trials.empty() ? 0 : trials.front().n_channels; }
    int n_samples() const { return trials.empty() ? 0 : trials.front().n_samples; }
    std::vector<int> per_class_counts() const;
    std::vector<int> labels() const;

    // FNV-1a over the canonical EEGF encoding; used to refuse comparing
    // runs on different data.
    uint64_t content_hash() const;
};

// EEGF binary layout (little endian):
//   "EEGF" | u32 version=1 | u32 n_trials | u32 n_channels | u32 n_samples
//   | n_trials x u16 label | n_trials*n_channels*n_samples x f32
// Samples are trial-major, channel-major.
std::vector<uint8_t> eegf_bytes(const Dataset& ds);
void save_eegf(const Dataset& ds, const std::string& path);
// expected_classes = 0 infers the class count from the labels.
Dataset load_eegf(const std::string& path, int expected_classes = 0);

// One CSV row per (trial, channel) with the samples as columns; the sidecar
// label file lists one class index per trial.
Dataset import_csv(const std::string& samples_csv, const std::string& labels_path,
                   double sample_rate_hz = 0.0);

struct SyntheticSpec {
    int n_classes = 4;
    int trials_per_class = 50;
    int n_channels = 22;
    int n_samples = 1001;
    double sample_rate_hz = 250.0;
    // Per class; empty selects an even split of the channels / a ladder of
    // disjoint bands starting at 8 Hz.
    std::vector<std::vector<int>> active_channels;
    std::vector<std::pair<double, double>> bands_hz;
    double signal_amplitude = 1.0;
    double noise_amplitude = 1.0;
    int bursts_per_trial = 3;
    uint64_t seed = 0;

    void validate() const;
    std::vector<std::vector<int>> resolved_channels() const;
    std::vector<std::pair<double, double>> resolved_bands() const;
};

// Gaussian background plus class-specific random-phase sinusoidal bursts on
// that class's channel subset. Distinct classes get distinct (band, subset)
// pairs, so the classes are separable by construction at high SNR.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Exactly per_class_test trials per class go to the test side, chosen by a
// seeded shuffle; the remainder stays in train. Original trial order is
// preserved within each side.
SplitResult split_train_test(const Dataset& ds, int per_class_test, uint64_t seed);

// Per-channel z-scoring. Fit on the training split only; apply reuses the
// stored statistics so the test set never leaks into them.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Normalizer fit(const Dataset& train);
    Dataset apply(const Dataset& ds) const;
};

// Mean power of `trial` in [lo_hz, hi_hz) on the given channels, via a
// direct DFT over the band bins.
double band_power(const EegTrial& trial, double lo_hz, double hi_hz,
                  double sample_rate_hz, const std::vector<int>& channels);

}  // namespace factormi
