#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "factormi/errors.hpp"

namespace factormi {

using Shape = std::vector<int>;

int64_t numel(const Shape& s);
std::string shape_str(const Shape& s);

class Tape;

// Dense row-major float64 tensor. Copies are cheap handles onto shared
// storage; the gradient buffer lives next to the data so every handle of a
// parameter sees gradients written through any other handle. The tape link
// (tape_id, node_id) is per-handle: detaching a handle blocks gradient flow
// through it without touching the storage.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor full(Shape shape, double v);

    const Shape& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int64_t size() const;
    bool empty() const { return st_ == nullptr; }

    double* data();
    const double* data() const;
    double operator[](int64_t i) const;
    double& operator[](int64_t i);
    double value() const;  // scalar tensors only

    bool has_grad() const;
    double* grad();
    const double* grad() const;

    // Same storage, different shape (row-major view). Keeps the tape link.
    Tensor reshaped(Shape shape) const;
    // Same storage, no tape link: gradients do not flow through this handle.
    Tensor detached() const;
    // Deep copy of the data, detached.
    Tensor clone() const;

    uint64_t tape_id = 0;  // 0 = detached
    int node_id = -1;

private:
    friend class Tape;
    struct Storage {
        std::vector<double> data;
        std::vector<double> grad;  // empty until first watched/attached
    };
    Shape shape_;
    std::shared_ptr<Storage> st_;
};

// Reverse-mode tape. Ops executed with a tape record one node each, in
// execution order (which is therefore topological). backward() seeds the
// scalar loss with 1 and replays the nodes once, in reverse, accumulating
// into the gradient buffers of everything watched or produced on the tape.
class Tape {
public:
    Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers a differentiable leaf (parameter or input) and zeroes its
    // gradient buffer. Idempotent per tape.
    void watch(Tensor& t);

    // Runs reverse accumulation from a scalar loss produced on this tape.
    // A tape can be replayed exactly once.
    void backward(const Tensor& loss);

    uint64_t id() const { return id_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    // --- used by op implementations ---
    // Allocates the output's gradient buffer and appends a node for it.
    void attach(Tensor& out);
    // Sets the backward closure of the node that produced `out`.
    void set_backward(const Tensor& out, std::function<void()> fn);
    // Storage to accumulate into for input `t`, or nullptr when `t` does not
    // participate in this tape (constants, detached handles).
    std::shared_ptr<Tensor::Storage> grad_sink(const Tensor& t) const;
    static std::shared_ptr<Tensor::Storage> storage_of(const Tensor& t) { return t.st_; }

private:
    struct Node {
        std::function<void()> back;  // null for leaves
    };
    uint64_t id_;
    std::vector<Node> nodes_;
    bool used_ = false;
};

// --- differentiable ops (tape == nullptr -> plain forward) ---

// Valid cross-correlation, no padding: y[o,i,j] = bias[o] +
// sum_{c,a,b} x[c, i*sh+a, j*sw+b] * w[o,c,a,b].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride_h, int stride_w, Tape* tape = nullptr);

Tensor avgpool2d(const Tensor& input, int kernel_h, int kernel_w,
                 int stride_h, int stride_w, Tape* tape = nullptr);

// y = W x + b with x 1-D.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Tape* tape = nullptr);

// x if x > 0 else alpha*(e^x - 1)
Tensor elu(const Tensor& x, double alpha = 1.0, Tape* tape = nullptr);

// log(1 + e^x), evaluated stably
Tensor softplus(const Tensor& x, Tape* tape = nullptr);

Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor scale(const Tensor& x, double c, Tape* tape = nullptr);
Tensor sum(const Tensor& x, Tape* tape = nullptr);
Tensor mean_all(const Tensor& x, Tape* tape = nullptr);
Tensor concat(const Tensor& a, const Tensor& b, Tape* tape = nullptr);  // 1-D

// Mean of a list of scalars.
Tensor mean_of(const std::vector<Tensor>& xs, Tape* tape = nullptr);

// -log softmax(logits)[label], computed via a stable log-sum-exp.
Tensor cross_entropy(const Tensor& logits, int label, Tape* tape = nullptr);

int argmax(const Tensor& v);

}  // namespace factormi
