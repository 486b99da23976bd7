#include "factormi/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace factormi::kernels {

namespace {

Backend initial_backend() {
#ifdef _OPENMP
    Backend b = Backend::parallel;
#else
    Backend b = Backend::serial;
#endif
    if (const char* env = std::getenv("FACTORMI_BACKEND")) {
        if (std::strcmp(env, "serial") == 0) b = Backend::serial;
        if (std::strcmp(env, "parallel") == 0) b = Backend::parallel;
    }
    return b;
}

Backend& state() {
    static Backend b = initial_backend();
    return b;
}

}  // namespace

Backend backend() { return state(); }
void set_backend(Backend b) { state() = b; }

#define FM_DISPATCH(fn, ...)                    \
    if (backend() == Backend::parallel) {       \
        parallel::fn(__VA_ARGS__);              \
    } else {                                    \
        serial::fn(__VA_ARGS__);                \
    }

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvDims& d) {
    FM_DISPATCH(conv2d_forward, x, w, b, y, d)
}
void conv2d_grad_input(const double* gy, const double* w, double* gx, const ConvDims& d) {
    FM_DISPATCH(conv2d_grad_input, gy, w, gx, d)
}
void conv2d_grad_weight(const double* gy, const double* x, double* gw, const ConvDims& d) {
    FM_DISPATCH(conv2d_grad_weight, gy, x, gw, d)
}
void conv2d_grad_bias(const double* gy, double* gb, const ConvDims& d) {
    FM_DISPATCH(conv2d_grad_bias, gy, gb, d)
}
void avgpool2d_forward(const double* x, double* y, const PoolDims& d) {
    FM_DISPATCH(avgpool2d_forward, x, y, d)
}
void avgpool2d_grad_input(const double* gy, double* gx, const PoolDims& d) {
    FM_DISPATCH(avgpool2d_grad_input, gy, gx, d)
}
void linear_forward(const double* x, const double* w, const double* b, double* y,
                    int n_out, int n_in) {
    FM_DISPATCH(linear_forward, x, w, b, y, n_out, n_in)
}
void linear_grad_input(const double* gy, const double* w, double* gx, int n_out, int n_in) {
    FM_DISPATCH(linear_grad_input, gy, w, gx, n_out, n_in)
}
void linear_grad_weight(const double* gy, const double* x, double* gw, int n_out, int n_in) {
    FM_DISPATCH(linear_grad_weight, gy, x, gw, n_out, n_in)
}
void linear_grad_bias(const double* gy, double* gb, int n_out) {
    FM_DISPATCH(linear_grad_bias, gy, gb, n_out)
}

#undef FM_DISPATCH

}  // namespace factormi::kernels
