#pragma once

namespace factormi::kernels {

// Geometry of a valid (no padding, no dilation) cross-correlation.
// oh = (h - kh)/sh + 1, ow = (w - kw)/sw + 1.
struct ConvDims {
    int c_in, h, w;      // input
    int c_out, kh, kw;   // filters
    int sh, sw;          // stride
    int oh, ow;          // output
};

struct PoolDims {
    int c, h, w;     // input
    int kh, kw;      // window
    int sh, sw;      // stride
    int oh, ow;      // output
};

enum class Backend { serial, parallel };

// Process-wide kernel backend. Defaults to parallel when built with OpenMP;
// FACTORMI_BACKEND=serial overrides. Both backends compute every output
// element with the same inner loop, so results are bit-identical.
Backend backend();
void set_backend(Backend b);

// Serial reference implementations. The parallel versions must match these
// bit-for-bit; tests compare the two on random inputs. All grad_* kernels
// accumulate (+=) into their output buffer.
namespace serial {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvDims& d);
void conv2d_grad_input(const double* gy, const double* w, double* gx, const ConvDims& d);
void conv2d_grad_weight(const double* gy, const double* x, double* gw, const ConvDims& d);
void conv2d_grad_bias(const double* gy, double* gb, const ConvDims& d);

void avgpool2d_forward(const double* x, double* y, const PoolDims& d);
void avgpool2d_grad_input(const double* gy, double* gx, const PoolDims& d);

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    int n_out, int n_in);
void linear_grad_input(const double* gy, const double* w, double* gx, int n_out, int n_in);
void linear_grad_weight(const double* gy, const double* x, double* gw, int n_out, int n_in);
void linear_grad_bias(const double* gy, double* gb, int n_out);

}  // namespace serial

// OpenMP versions of the kernels above. Grad kernels are gather-style
// (each thread owns the elements it writes), so no atomics are needed and
// the result does not depend on the thread count.
namespace parallel {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvDims& d);
void conv2d_grad_input(const double* gy, const double* w, double* gx, const ConvDims& d);
void conv2d_grad_weight(const double* gy, const double* x, double* gw, const ConvDims& d);
void conv2d_grad_bias(const double* gy, double* gb, const ConvDims& d);

void avgpool2d_forward(const double* x, double* y, const PoolDims& d);
void avgpool2d_grad_input(const double* gy, double* gx, const PoolDims& d);

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    int n_out, int n_in);
void linear_grad_input(const double* gy, const double* w, double* gx, int n_out, int n_in);
void linear_grad_weight(const double* gy, const double* x, double* gw, int n_out, int n_in);
void linear_grad_bias(const double* gy, double* gb, int n_out);

}  // namespace parallel

// Dispatch through backend().
void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvDims& d);
void conv2d_grad_input(const double* gy, const double* w, double* gx, const ConvDims& d);
void conv2d_grad_weight(const double* gy, const double* x, double* gw, const ConvDims& d);
void conv2d_grad_bias(const double* gy, double* gb, const ConvDims& d);

void avgpool2d_forward(const double* x, double* y, const PoolDims& d);
void avgpool2d_grad_input(const double* gy, double* gx, const PoolDims& d);

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    int n_out, int n_in);
void linear_grad_input(const double* gy, const double* w, double* gx, int n_out, int n_in);
void linear_grad_weight(const double* gy, const double* x, double* gw, int n_out, int n_in);
void linear_grad_bias(const double* gy, double* gb, int n_out);

}  // namespace factormi::kernels
