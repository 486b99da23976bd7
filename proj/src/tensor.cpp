#include "factormi/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "factormi/kernels.hpp"

namespace factormi {

int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int e : s) n *= e;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

namespace {
void check_shape(const Shape& s) {
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] <= 0) {
            throw ShapeError("tensor: extent of axis " + std::to_string(i) +
                             " must be positive, got " + std::to_string(s[i]));
        }
    }
}
}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    st_ = std::make_shared<Storage>();
    st_->data.assign(static_cast<size_t>(numel(shape_)), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
    check_shape(shape_);
    if (numel(shape_) != static_cast<int64_t>(values.size())) {
        throw ShapeError("tensor: shape " + shape_str(shape_) + " needs " +
                         std::to_string(numel(shape_)) + " values, got " +
                         std::to_string(values.size()));
    }
    st_ = std::make_shared<Storage>();
    st_->data = std::move(values);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::full(Shape shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : t.st_->data) x = v;
    return t;
}

int64_t Tensor::size() const { return st_ ? static_cast<int64_t>(st_->data.size()) : 0; }

double* Tensor::data() { return st_->data.data(); }
const double* Tensor::data() const { return st_->data.data(); }

double Tensor::operator[](int64_t i) const { return st_->data[static_cast<size_t>(i)]; }
double& Tensor::operator[](int64_t i) { return st_->data[static_cast<size_t>(i)]; }

double Tensor::value() const {
    if (size() != 1) {
        throw ShapeError("value(): tensor of shape " + shape_str(shape_) + " is not a scalar");
    }
    return st_->data[0];
}

bool Tensor::has_grad() const { return st_ && !st_->grad.empty(); }

double* Tensor::grad() {
    if (!has_grad()) throw TapeError("grad(): no gradient buffer; tensor was never watched");
    return st_->grad.data();
}

const double* Tensor::grad() const {
    if (!has_grad()) throw TapeError("grad(): no gradient buffer; tensor was never watched");
    return st_->grad.data();
}

Tensor Tensor::reshaped(Shape shape) const {
    check_shape(shape);
    if (numel(shape) != size()) {
        throw ShapeError("reshape: cannot view " + shape_str(shape_) + " as " + shape_str(shape));
    }
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.tape_id = 0;
    t.node_id = -1;
    return t;
}

Tensor Tensor::clone() const {
    Tensor t(shape_, st_->data);
    return t;
}

// --- Tape ---

namespace {
std::atomic<uint64_t> g_tape_counter{0};
}

Tape::Tape() : id_(++g_tape_counter) {}

void Tape::watch(Tensor& t) {
    if (t.empty()) throw TapeError("watch: empty tensor");
    if (t.tape_id == id_ && t.node_id >= 0) return;
    t.st_->grad.assign(t.st_->data.size(), 0.0);
    t.tape_id = id_;
    t.node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
}

void Tape::attach(Tensor& out) {
    out.st_->grad.assign(out.st_->data.size(), 0.0);
    out.tape_id = id_;
    out.node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
}

void Tape::set_backward(const Tensor& out, std::function<void()> fn) {
    nodes_[static_cast<size_t>(out.node_id)].back = std::move(fn);
}

std::shared_ptr<Tensor::Storage> Tape::grad_sink(const Tensor& t) const {
    if (t.tape_id != id_ || t.node_id < 0) return nullptr;
    return t.st_;
}

void Tape::backward(const Tensor& loss) {
    if (loss.empty() || loss.tape_id != id_ || loss.node_id < 0) {
        throw TapeError("backward: loss tensor is detached from this tape");
    }
    if (loss.size() != 1) {
        throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
    }
    if (used_) throw TapeError("backward: tape already replayed");
    used_ = true;
    loss.st_->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->back) it->back();
    }
}

// --- ops ---

namespace {

using StoragePtr = std::shared_ptr<Tensor::Storage>;

kernels::ConvDims conv_dims(const Tensor& x, const Tensor& w, const Tensor& b,
                            int sh, int sw) {
    if (x.ndim() != 3) {
        throw ShapeError("conv2d: input must be rank 3 (channels,height,width), got " +
                         shape_str(x.shape()));
    }
    if (w.ndim() != 4) {
        throw ShapeError("conv2d: weight must be rank 4 (out,in,kh,kw), got " +
                         shape_str(w.shape()));
    }
    if (b.ndim() != 1 || b.shape()[0] != w.shape()[0]) {
        throw ShapeError("conv2d: bias must have one entry per output channel (axis 0 of weight = " +
                         std::to_string(w.shape()[0]) + "), got " + shape_str(b.shape()));
    }
    if (w.shape()[1] != x.shape()[0]) {
        throw ShapeError("conv2d: input channels (axis 0) = " + std::to_string(x.shape()[0]) +
                         " but weight expects " + std::to_string(w.shape()[1]) + " (axis 1)");
    }
    if (sh < 1 || sw < 1) throw ShapeError("conv2d: strides must be >= 1");
    kernels::ConvDims d;
    d.c_in = x.shape()[0];
    d.h = x.shape()[1];
    d.w = x.shape()[2];
    d.c_out = w.shape()[0];
    d.kh = w.shape()[2];
    d.kw = w.shape()[3];
    d.sh = sh;
    d.sw = sw;
    if (d.kh > d.h) {
        throw ShapeError("conv2d: kernel height " + std::to_string(d.kh) +
                         " exceeds input height " + std::to_string(d.h) + " (axis 1)");
    }
    if (d.kw > d.w) {
        throw ShapeError("conv2d: kernel width " + std::to_string(d.kw) +
                         " exceeds input width " + std::to_string(d.w) + " (axis 2)");
    }
    d.oh = (d.h - d.kh) / d.sh + 1;
    d.ow = (d.w - d.kw) / d.sw + 1;
    return d;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride_h, int stride_w, Tape* tape) {
    kernels::ConvDims d = conv_dims(input, weight, bias, stride_h, stride_w);
    Tensor y({d.c_out, d.oh, d.ow});
    kernels::conv2d_forward(input.data(), weight.data(), bias.data(), y.data(), d);
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr xs = Tape::storage_of(input);
        StoragePtr ws = Tape::storage_of(weight);
        StoragePtr gx = tape->grad_sink(input);
        StoragePtr gw = tape->grad_sink(weight);
        StoragePtr gb = tape->grad_sink(bias);
        tape->set_backward(y, [=]() {
            const double* gy = ys->grad.data();
            if (gx) kernels::conv2d_grad_input(gy, ws->data.data(), gx->grad.data(), d);
            if (gw) kernels::conv2d_grad_weight(gy, xs->data.data(), gw->grad.data(), d);
            if (gb) kernels::conv2d_grad_bias(gy, gb->grad.data(), d);
        });
    }
    return y;
}

Tensor avgpool2d(const Tensor& input, int kernel_h, int kernel_w,
                 int stride_h, int stride_w, Tape* tape) {
    if (input.ndim() != 3) {
        throw ShapeError("avgpool2d: input must be rank 3, got " + shape_str(input.shape()));
    }
    if (kernel_h < 1 || kernel_w < 1 || stride_h < 1 || stride_w < 1) {
        throw ShapeError("avgpool2d: kernel and stride must be >= 1");
    }
    kernels::PoolDims d;
    d.c = input.shape()[0];
    d.h = input.shape()[1];
    d.w = input.shape()[2];
    d.kh = kernel_h;
    d.kw = kernel_w;
    d.sh = stride_h;
    d.sw = stride_w;
    if (d.kh > d.h || d.kw > d.w) {
        throw ShapeError("avgpool2d: kernel (" + std::to_string(d.kh) + "," + std::to_string(d.kw) +
                         ") larger than input " + shape_str(input.shape()));
    }
    d.oh = (d.h - d.kh) / d.sh + 1;
    d.ow = (d.w - d.kw) / d.sw + 1;
    Tensor y({d.c, d.oh, d.ow});
    kernels::avgpool2d_forward(input.data(), y.data(), d);
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr gx = tape->grad_sink(input);
        tape->set_backward(y, [=]() {
            if (gx) kernels::avgpool2d_grad_input(ys->grad.data(), gx->grad.data(), d);
        });
    }
    return y;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias, Tape* tape) {
    if (input.ndim() != 1) {
        throw ShapeError("linear: input must be rank 1, got " + shape_str(input.shape()));
    }
    if (weight.ndim() != 2) {
        throw ShapeError("linear: weight must be rank 2, got " + shape_str(weight.shape()));
    }
    int n_out = weight.shape()[0];
    int n_in = weight.shape()[1];
    if (input.shape()[0] != n_in) {
        throw ShapeError("linear: input length " + std::to_string(input.shape()[0]) +
                         " does not match weight columns " + std::to_string(n_in) + " (axis 1)");
    }
    if (bias.ndim() != 1 || bias.shape()[0] != n_out) {
        throw ShapeError("linear: bias length must equal weight rows " + std::to_string(n_out) +
                         ", got " + shape_str(bias.shape()));
    }
    Tensor y({n_out});
    kernels::linear_forward(input.data(), weight.data(), bias.data(), y.data(), n_out, n_in);
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr xs = Tape::storage_of(input);
        StoragePtr ws = Tape::storage_of(weight);
        StoragePtr gx = tape->grad_sink(input);
        StoragePtr gw = tape->grad_sink(weight);
        StoragePtr gb = tape->grad_sink(bias);
        tape->set_backward(y, [=]() {
            const double* gy = ys->grad.data();
            if (gx) kernels::linear_grad_input(gy, ws->data.data(), gx->grad.data(), n_out, n_in);
            if (gw) kernels::linear_grad_weight(gy, xs->data.data(), gw->grad.data(), n_out, n_in);
            if (gb) kernels::linear_grad_bias(gy, gb->grad.data(), n_out);
        });
    }
    return y;
}

Tensor elu(const Tensor& x, double alpha, Tape* tape) {
    Tensor y(x.shape());
    const int64_t n = x.size();
    for (int64_t i = 0; i < n; ++i) {
        double v = x[i];
        y[i] = v > 0.0 ? v : alpha * std::expm1(v);
    }
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr xs = Tape::storage_of(x);
        StoragePtr gx = tape->grad_sink(x);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            for (size_t i = 0; i < ys->grad.size(); ++i) {
                double v = xs->data[i];
                gx->grad[i] += ys->grad[i] * (v > 0.0 ? 1.0 : alpha * std::exp(v));
            }
        });
    }
    return y;
}

Tensor softplus(const Tensor& x, Tape* tape) {
    Tensor y(x.shape());
    const int64_t n = x.size();
    for (int64_t i = 0; i < n; ++i) {
        double v = x[i];
        y[i] = std::log1p(std::exp(-std::abs(v))) + (v > 0.0 ? v : 0.0);
    }
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr xs = Tape::storage_of(x);
        StoragePtr gx = tape->grad_sink(x);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            for (size_t i = 0; i < ys->grad.size(); ++i) {
                double s = 1.0 / (1.0 + std::exp(-xs->data[i]));
                gx->grad[i] += ys->grad[i] * s;
            }
        });
    }
    return y;
}

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
    Tensor y(a.shape());
    const int64_t n = a.size();
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr ga = tape->grad_sink(a);
        StoragePtr gb = tape->grad_sink(b);
        tape->set_backward(y, [=]() {
            for (size_t i = 0; i < ys->grad.size(); ++i) {
                if (ga) ga->grad[i] += ys->grad[i];
                if (gb) gb->grad[i] += ys->grad[i];
            }
        });
    }
    return y;
}

Tensor scale(const Tensor& x, double c, Tape* tape) {
    Tensor y(x.shape());
    const int64_t n = x.size();
    for (int64_t i = 0; i < n; ++i) y[i] = c * x[i];
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr gx = tape->grad_sink(x);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            for (size_t i = 0; i < ys->grad.size(); ++i) gx->grad[i] += c * ys->grad[i];
        });
    }
    return y;
}

Tensor sum(const Tensor& x, Tape* tape) {
    double acc = 0.0;
    const int64_t n = x.size();
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    Tensor y = Tensor::scalar(acc);
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr gx = tape->grad_sink(x);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            for (auto& g : gx->grad) g += ys->grad[0];
        });
    }
    return y;
}

Tensor mean_all(const Tensor& x, Tape* tape) {
    double acc = 0.0;
    const int64_t n = x.size();
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    Tensor y = Tensor::scalar(acc / static_cast<double>(n));
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr gx = tape->grad_sink(x);
        const double inv = 1.0 / static_cast<double>(n);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            for (auto& g : gx->grad) g += ys->grad[0] * inv;
        });
    }
    return y;
}

Tensor concat(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.ndim() != 1 || b.ndim() != 1) {
        throw ShapeError("concat: both inputs must be rank 1, got " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    }
    const int na = a.shape()[0];
    const int nb = b.shape()[0];
    Tensor y({na + nb});
    for (int i = 0; i < na; ++i) y[i] = a[i];
    for (int i = 0; i < nb; ++i) y[na + i] = b[i];
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr ga = tape->grad_sink(a);
        StoragePtr gb = tape->grad_sink(b);
        tape->set_backward(y, [=]() {
            if (ga) {
                for (int i = 0; i < na; ++i) ga->grad[static_cast<size_t>(i)] += ys->grad[static_cast<size_t>(i)];
            }
            if (gb) {
                for (int i = 0; i < nb; ++i) gb->grad[static_cast<size_t>(i)] += ys->grad[static_cast<size_t>(na + i)];
            }
        });
    }
    return y;
}

Tensor mean_of(const std::vector<Tensor>& xs, Tape* tape) {
    if (xs.empty()) throw ShapeError("mean_of: empty list");
    Tensor acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i], tape);
    return scale(acc, 1.0 / static_cast<double>(xs.size()), tape);
}

Tensor cross_entropy(const Tensor& logits, int label, Tape* tape) {
    if (logits.ndim() != 1) {
        throw ShapeError("cross_entropy: logits must be rank 1, got " + shape_str(logits.shape()));
    }
    const int k = logits.shape()[0];
    if (label < 0 || label >= k) {
        throw DataError("cross_entropy: label " + std::to_string(label) + " out of range [0," +
                        std::to_string(k) + ")");
    }
    double m = logits[0];
    for (int i = 1; i < k; ++i) m = std::max(m, logits[i]);
    double z = 0.0;
    for (int i = 0; i < k; ++i) z += std::exp(logits[i] - m);
    double lse = m + std::log(z);
    Tensor y = Tensor::scalar(lse - logits[label]);
    if (tape) {
        tape->attach(y);
        StoragePtr ys = Tape::storage_of(y);
        StoragePtr xs = Tape::storage_of(logits);
        StoragePtr gx = tape->grad_sink(logits);
        tape->set_backward(y, [=]() {
            if (!gx) return;
            double mm = xs->data[0];
            for (size_t i = 1; i < xs->data.size(); ++i) mm = std::max(mm, xs->data[i]);
            double zz = 0.0;
            for (double v : xs->data) zz += std::exp(v - mm);
            const double g = ys->grad[0];
            for (size_t i = 0; i < xs->data.size(); ++i) {
                double p = std::exp(xs->data[i] - mm) / zz;
                gx->grad[i] += g * (p - (static_cast<int>(i) == label ? 1.0 : 0.0));
            }
        });
    }
    return y;
}

int argmax(const Tensor& v) {
    int best = 0;
    for (int64_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace factormi
