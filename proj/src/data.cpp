#include "factormi/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "factormi/errors.hpp"
#include "factormi/log.hpp"
#include "factormi/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "EEGF serialization assumes a little-endian host");

namespace factormi {

std::vector<int> Dataset::per_class_counts() const {
    std::vector<int> counts(static_cast<size_t>(n_classes()), 0);
    for (const EegTrial& t : trials) counts[static_cast<size_t>(t.label)]++;
    return counts;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(trials.size());
    for (const EegTrial& t : trials) out.push_back(t.label);
    return out;
}

uint64_t Dataset::content_hash() const {
    std::vector<uint8_t> bytes = eegf_bytes(*this);
    uint64_t h = 0xcbf29ce484222325ull;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

template <typename T>
void put(std::vector<uint8_t>& out, T v) {
    uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T take(const std::vector<uint8_t>& in, size_t& off, const std::string& what) {
    if (off + sizeof(T) > in.size()) {
        throw DataError("EEGF: truncated while reading " + what + " at byte offset " +
                        std::to_string(off));
    }
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

std::vector<uint8_t> eegf_bytes(const Dataset& ds) {
    std::vector<uint8_t> out;
    out.reserve(16 + ds.trials.size() * 2 +
                ds.trials.size() * static_cast<size_t>(ds.n_channels()) * ds.n_samples() * 4);
    out.insert(out.end(), {'E', 'E', 'G', 'F'});
    put<uint32_t>(out, 1u);
    put<uint32_t>(out, static_cast<uint32_t>(ds.trials.size()));
    put<uint32_t>(out, static_cast<uint32_t>(ds.n_channels()));
    put<uint32_t>(out, static_cast<uint32_t>(ds.n_samples()));
    for (const EegTrial& t : ds.trials) put<uint16_t>(out, static_cast<uint16_t>(t.label));
    for (const EegTrial& t : ds.trials) {
        for (double v : t.samples) put<float>(out, static_cast<float>(v));
    }
    return out;
}

void save_eegf(const Dataset& ds, const std::string& path) {
    for (const EegTrial& t : ds.trials) {
        if (t.n_channels != ds.n_channels() || t.n_samples != ds.n_samples()) {
            throw DataError("EEGF: dataset has non-uniform trial shapes");
        }
    }
    std::vector<uint8_t> bytes = eegf_bytes(ds);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("EEGF: cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("EEGF: write failed for '" + path + "'");
}

Dataset load_eegf(const std::string& path, int expected_classes) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("EEGF: cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "EEGF", 4) != 0) {
        throw DataError("EEGF: bad magic at byte offset 0 in '" + path + "'");
    }
    size_t off = 4;
    uint32_t version = take<uint32_t>(bytes, off, "version");
    if (version != 1) {
        throw DataError("EEGF: unsupported format version " + std::to_string(version) +
                        " at byte offset 4");
    }
    uint32_t n_trials = take<uint32_t>(bytes, off, "trial count");
    uint32_t n_channels = take<uint32_t>(bytes, off, "channel count");
    uint32_t n_samples = take<uint32_t>(bytes, off, "sample count");

    std::vector<uint16_t> labels(n_trials);
    int max_label = -1;
    for (uint32_t i = 0; i < n_trials; ++i) {
        size_t at = off;
        labels[i] = take<uint16_t>(bytes, off, "label of trial " + std::to_string(i));
        if (expected_classes > 0 && labels[i] >= expected_classes) {
            throw DataError("EEGF: label " + std::to_string(labels[i]) + " of trial " +
                            std::to_string(i) + " out of range [0," +
                            std::to_string(expected_classes) + ") at byte offset " +
                            std::to_string(at));
        }
        max_label = std::max(max_label, static_cast<int>(labels[i]));
    }

    Dataset ds;
    ds.provenance = "file:" + path;
    const size_t per_trial = static_cast<size_t>(n_channels) * n_samples;
    ds.trials.resize(n_trials);
    for (uint32_t i = 0; i < n_trials; ++i) {
        EegTrial& t = ds.trials[i];
        t.n_channels = static_cast<int>(n_channels);
        t.n_samples = static_cast<int>(n_samples);
        t.label = labels[i];
        t.samples.resize(per_trial);
        for (size_t k = 0; k < per_trial; ++k) {
            t.samples[k] = take<float>(bytes, off, "samples of trial " + std::to_string(i));
        }
        for (double v : t.samples) {
            if (!std::isfinite(v)) {
                throw DataError("EEGF: non-finite sample in trial " + std::to_string(i));
            }
        }
    }
    if (off != bytes.size()) {
        throw DataError("EEGF: " + std::to_string(bytes.size() - off) +
                        " trailing bytes after payload at byte offset " + std::to_string(off));
    }
    int n_classes = expected_classes > 0 ? expected_classes : max_label + 1;
    if (n_classes <= 0) n_classes = 1;
    for (int c = 0; c < n_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
    return ds;
}

Dataset import_csv(const std::string& samples_csv, const std::string& labels_path,
                   double sample_rate_hz) {
    std::ifstream lf(labels_path);
    if (!lf) throw DataError("CSV import: cannot open label file '" + labels_path + "'");
    std::vector<int> labels;
    std::string line;
    while (std::getline(lf, line)) {
        if (line.empty()) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw DataError("CSV import: bad label '" + line + "' in '" + labels_path + "'");
        }
    }
    if (labels.empty()) throw DataError("CSV import: label file '" + labels_path + "' is empty");

    std::ifstream f(samples_csv);
    if (!f) throw DataError("CSV import: cannot open '" + samples_csv + "'");
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError("CSV import: bad value '" + cell + "' in row " +
                                std::to_string(rows.size()));
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("CSV import: row " + std::to_string(rows.size()) + " has " +
                            std::to_string(row.size()) + " columns, expected " +
                            std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("CSV import: '" + samples_csv + "' has no rows");
    if (rows.size() % labels.size() != 0) {
        throw DataError("CSV import: " + std::to_string(rows.size()) +
                        " rows is not a multiple of " + std::to_string(labels.size()) +
                        " trials");
    }
    const int n_channels = static_cast<int>(rows.size() / labels.size());
    const int n_samples = static_cast<int>(rows.front().size());

    Dataset ds;
    ds.sample_rate_hz = sample_rate_hz;
    ds.provenance = "csv:" + samples_csv;
    int max_label = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        EegTrial t;
        t.n_channels = n_channels;
        t.n_samples = n_samples;
        t.label = labels[i];
        if (t.label < 0) throw DataError("CSV import: negative label for trial " + std::to_string(i));
        max_label = std::max(max_label, t.label);
        t.samples.reserve(static_cast<size_t>(n_channels) * n_samples);
        for (int ch = 0; ch < n_channels; ++ch) {
            const auto& row = rows[i * n_channels + ch];
            t.samples.insert(t.samples.end(), row.begin(), row.end());
        }
        ds.trials.push_back(std::move(t));
    }
    for (int c = 0; c <= max_label; ++c) ds.class_names.push_back("class" + std::to_string(c));
    return ds;
}

void SyntheticSpec::validate() const {
    if (n_classes < 1) throw ConfigError("synthetic: n_classes must be >= 1");
    if (trials_per_class < 1) throw ConfigError("synthetic: trials_per_class must be >= 1");
    if (n_channels < 1) throw ConfigError("synthetic: n_channels must be >= 1");
    if (n_samples < 2) throw ConfigError("synthetic: n_samples must be >= 2");
    if (sample_rate_hz <= 0) throw ConfigError("synthetic: sample_rate_hz must be positive");
    if (signal_amplitude < 0 || noise_amplitude < 0) {
        throw ConfigError("synthetic: amplitudes must be >= 0");
    }
    if (bursts_per_trial < 1) throw ConfigError("synthetic: bursts_per_trial must be >= 1");
    const double nyquist = sample_rate_hz / 2.0;
    for (const auto& [lo, hi] : resolved_bands()) {
        if (!(lo > 0.0) || !(hi > lo) || !(hi < nyquist)) {
            throw ConfigError("synthetic: band [" + std::to_string(lo) + "," + std::to_string(hi) +
                              "] Hz must satisfy 0 < lo < hi < Nyquist (" + std::to_string(nyquist) +
                              ")");
        }
    }
    for (const auto& chans : resolved_channels()) {
        for (int c : chans) {
            if (c < 0 || c >= n_channels) {
                throw ConfigError("synthetic: active channel " + std::to_string(c) +
                                  " out of range [0," + std::to_string(n_channels) + ")");
            }
        }
    }
}

std::vector<std::vector<int>> SyntheticSpec::resolved_channels() const {
    if (!active_channels.empty()) {
        if (static_cast<int>(active_channels.size()) != n_classes) {
            throw ConfigError("synthetic: active_channels must list one subset per class");
        }
        return active_channels;
    }
    std::vector<std::vector<int>> out(static_cast<size_t>(n_classes));
    if (n_channels >= n_classes) {
        // even contiguous split
        for (int c = 0; c < n_classes; ++c) {
            int lo = c * n_channels / n_classes;
            int hi = (c + 1) * n_channels / n_classes;
            for (int ch = lo; ch < hi; ++ch) out[static_cast<size_t>(c)].push_back(ch);
        }
    } else {
        for (int c = 0; c < n_classes; ++c) out[static_cast<size_t>(c)].push_back(c % n_channels);
    }
    return out;
}

std::vector<std::pair<double, double>> SyntheticSpec::resolved_bands() const {
    if (!bands_hz.empty()) {
        if (static_cast<int>(bands_hz.size()) != n_classes) {
            throw ConfigError("synthetic: bands_hz must list one band per class");
        }
        return bands_hz;
    }
    std::vector<std::pair<double, double>> out;
    for (int c = 0; c < n_classes; ++c) {
        out.emplace_back(8.0 + 6.0 * c, 12.0 + 6.0 * c);
    }
    return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto channels = spec.resolved_channels();
    const auto bands = spec.resolved_bands();

    Dataset ds;
    ds.sample_rate_hz = spec.sample_rate_hz;
    ds.provenance = "synthetic:seed=" + std::to_string(spec.seed);
    for (int c = 0; c < spec.n_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));

    Rng rng(Rng::derive(spec.seed, 0x5eedda7a));
    const size_t per_trial = static_cast<size_t>(spec.n_channels) * spec.n_samples;
    for (int c = 0; c < spec.n_classes; ++c) {
        const auto& [lo, hi] = bands[static_cast<size_t>(c)];
        const auto& active = channels[static_cast<size_t>(c)];
        for (int k = 0; k < spec.trials_per_class; ++k) {
            EegTrial t;
            t.n_channels = spec.n_channels;
            t.n_samples = spec.n_samples;
            t.label = c;
            t.samples.resize(per_trial);
            for (auto& v : t.samples) v = spec.noise_amplitude * rng.normal();
            for (int burst = 0; burst < spec.bursts_per_trial; ++burst) {
                const double freq = rng.uniform(lo, hi);
                const double phase = rng.uniform(0.0, 2.0 * M_PI);
                const double w = 2.0 * M_PI * freq / spec.sample_rate_hz;
                for (int ch : active) {
                    for (int s = 0; s < spec.n_samples; ++s) {
                        t.at(ch, s) += spec.signal_amplitude * std::sin(w * s + phase);
                    }
                }
            }
            ds.trials.push_back(std::move(t));
        }
    }
    return ds;
}

SplitResult split_train_test(const Dataset& ds, int per_class_test, uint64_t seed) {
    if (per_class_test < 0) throw ConfigError("split: per_class_test must be >= 0");
    std::vector<std::vector<int>> by_class(static_cast<size_t>(ds.n_classes()));
    for (size_t i = 0; i < ds.trials.size(); ++i) {
        by_class[static_cast<size_t>(ds.trials[i].label)].push_back(static_cast<int>(i));
    }
    std::vector<bool> is_test(ds.trials.size(), false);
    Rng rng(Rng::derive(seed, 0x5b717));
    for (int c = 0; c < ds.n_classes(); ++c) {
        auto& idx = by_class[static_cast<size_t>(c)];
        if (static_cast<int>(idx.size()) <= per_class_test) {
            throw DataError("split: class " + std::to_string(c) + " has " +
                            std::to_string(idx.size()) + " trials, need more than " +
                            std::to_string(per_class_test));
        }
        rng.shuffle(idx);
        for (int k = 0; k < per_class_test; ++k) is_test[static_cast<size_t>(idx[static_cast<size_t>(k)])] = true;
    }
    SplitResult out;
    out.train.class_names = out.test.class_names = ds.class_names;
    out.train.sample_rate_hz = out.test.sample_rate_hz = ds.sample_rate_hz;
    out.train.provenance = ds.provenance + "|train";
    out.test.provenance = ds.provenance + "|test";
    for (size_t i = 0; i < ds.trials.size(); ++i) {
        (is_test[i] ? out.test : out.train).trials.push_back(ds.trials[i]);
    }
    return out;
}

Normalizer Normalizer::fit(const Dataset& train) {
    if (train.trials.empty()) throw DataError("normalize: empty training set");
    const int n_ch = train.n_channels();
    const int n_s = train.n_samples();
    Normalizer nz;
    nz.mean.assign(static_cast<size_t>(n_ch), 0.0);
    nz.stddev.assign(static_cast<size_t>(n_ch), 0.0);
    const double count = static_cast<double>(train.trials.size()) * n_s;
    for (const EegTrial& t : train.trials) {
        for (int ch = 0; ch < n_ch; ++ch) {
            for (int s = 0; s < n_s; ++s) nz.mean[static_cast<size_t>(ch)] += t.at(ch, s);
        }
    }
    for (auto& m : nz.mean) m /= count;
    for (const EegTrial& t : train.trials) {
        for (int ch = 0; ch < n_ch; ++ch) {
            for (int s = 0; s < n_s; ++s) {
                const double d = t.at(ch, s) - nz.mean[static_cast<size_t>(ch)];
                nz.stddev[static_cast<size_t>(ch)] += d * d;
            }
        }
    }
    for (int ch = 0; ch < n_ch; ++ch) {
        double v = std::sqrt(nz.stddev[static_cast<size_t>(ch)] / count);
        if (v < 1e-12) {
            log::warn("normalize: channel " + std::to_string(ch) +
                      " has (near) zero variance; flooring to 1e-12");
            v = 1e-12;
        }
        nz.stddev[static_cast<size_t>(ch)] = v;
    }
    return nz;
}

Dataset Normalizer::apply(const Dataset& ds) const {
    if (ds.n_channels() != static_cast<int>(mean.size())) {
        throw DataError("normalize: dataset has " + std::to_string(ds.n_channels()) +
                        " channels but statistics cover " + std::to_string(mean.size()));
    }
    Dataset out = ds;
    for (EegTrial& t : out.trials) {
        for (int ch = 0; ch < t.n_channels; ++ch) {
            const double m = mean[static_cast<size_t>(ch)];
            const double inv = 1.0 / stddev[static_cast<size_t>(ch)];
            for (int s = 0; s < t.n_samples; ++s) t.at(ch, s) = (t.at(ch, s) - m) * inv;
        }
    }
    return out;
}

double band_power(const EegTrial& trial, double lo_hz, double hi_hz,
                  double sample_rate_hz, const std::vector<int>& channels) {
    if (channels.empty()) return 0.0;
    const int n = trial.n_samples;
    const int k_lo = std::max(1, static_cast<int>(std::ceil(lo_hz * n / sample_rate_hz)));
    const int k_hi = std::min(n / 2, static_cast<int>(std::floor(hi_hz * n / sample_rate_hz)));
    if (k_hi < k_lo) return 0.0;
    double total = 0.0;
    for (int ch : channels) {
        for (int k = k_lo; k <= k_hi; ++k) {
            // Goertzel-style direct projection onto bin k
            double re = 0.0, im = 0.0;
            const double w = 2.0 * M_PI * k / n;
            for (int s = 0; s < n; ++s) {
                const double v = trial.at(ch, s);
                re += v * std::cos(w * s);
                im -= v * std::sin(w * s);
            }
            total += (re * re + im * im) / (static_cast<double>(n) * n);
        }
    }
    return total / static_cast<double>(channels.size());
}

}  // namespace factormi
