#include "factormi/kernels.hpp"

#include <cstddef>

namespace factormi::kernels::parallel {

namespace {
inline size_t idx3(int c, int i, int j, int h, int w) {
    return (static_cast<size_t>(c) * h + i) * w + j;
}
inline size_t idx4(int o, int c, int a, int b, int ci, int kh, int kw) {
    return ((static_cast<size_t>(o) * ci + c) * kh + a) * kw + b;
}
}  // namespace

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < d.c_out; ++oc) {
        for (int i = 0; i < d.oh; ++i) {
            for (int j = 0; j < d.ow; ++j) {
                double acc = b[oc];
                for (int c = 0; c < d.c_in; ++c) {
                    for (int a = 0; a < d.kh; ++a) {
                        const double* xrow = x + idx3(c, i * d.sh + a, j * d.sw, d.h, d.w);
                        const double* wrow = w + idx4(oc, c, a, 0, d.c_in, d.kh, d.kw);
                        double acc_row = 0.0;
                        for (int t = 0; t < d.kw; ++t) acc_row += xrow[t] * wrow[t];
                        acc += acc_row;
                    }
                }
                y[idx3(oc, i, j, d.oh, d.ow)] = acc;
            }
        }
    }
}

void conv2d_grad_input(const double* gy, const double* w, double* gx, const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < d.c_in; ++c) {
        for (int yy = 0; yy < d.h; ++yy) {
            for (int xx = 0; xx < d.w; ++xx) {
                double acc = 0.0;
                for (int oc = 0; oc < d.c_out; ++oc) {
                    for (int a = 0; a < d.kh; ++a) {
                        int num = yy - a;
                        if (num < 0 || num % d.sh != 0) continue;
                        int i = num / d.sh;
                        if (i >= d.oh) continue;
                        for (int t = 0; t < d.kw; ++t) {
                            int numw = xx - t;
                            if (numw < 0 || numw % d.sw != 0) continue;
                            int j = numw / d.sw;
                            if (j >= d.ow) continue;
                            acc += gy[idx3(oc, i, j, d.oh, d.ow)] *
                                   w[idx4(oc, c, a, t, d.c_in, d.kh, d.kw)];
                        }
                    }
                }
                gx[idx3(c, yy, xx, d.h, d.w)] += acc;
            }
        }
    }
}

void conv2d_grad_weight(const double* gy, const double* x, double* gw, const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < d.c_out; ++oc) {
        for (int c = 0; c < d.c_in; ++c) {
            for (int a = 0; a < d.kh; ++a) {
                for (int t = 0; t < d.kw; ++t) {
                    double acc = 0.0;
                    for (int i = 0; i < d.oh; ++i) {
                        const double* gyrow = gy + idx3(oc, i, 0, d.oh, d.ow);
                        const double* xrow = x + idx3(c, i * d.sh + a, t, d.h, d.w);
                        for (int j = 0; j < d.ow; ++j) acc += gyrow[j] * xrow[static_cast<size_t>(j) * d.sw];
                    }
                    gw[idx4(oc, c, a, t, d.c_in, d.kh, d.kw)] += acc;
                }
            }
        }
    }
}

void conv2d_grad_bias(const double* gy, double* gb, const ConvDims& d) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < d.c_out; ++oc) {
        double acc = 0.0;
        const double* plane = gy + static_cast<size_t>(oc) * d.oh * d.ow;
        for (int k = 0; k < d.oh * d.ow; ++k) acc += plane[k];
        gb[oc] += acc;
    }
}

void avgpool2d_forward(const double* x, double* y, const PoolDims& d) {
    const double inv = 1.0 / (static_cast<double>(d.kh) * d.kw);
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < d.c; ++c) {
        for (int i = 0; i < d.oh; ++i) {
            for (int j = 0; j < d.ow; ++j) {
                double acc = 0.0;
                for (int a = 0; a < d.kh; ++a) {
                    const double* xrow = x + idx3(c, i * d.sh + a, j * d.sw, d.h, d.w);
                    for (int t = 0; t < d.kw; ++t) acc += xrow[t];
                }
                y[idx3(c, i, j, d.oh, d.ow)] = acc * inv;
            }
        }
    }
}

void avgpool2d_grad_input(const double* gy, double* gx, const PoolDims& d) {
    const double inv = 1.0 / (static_cast<double>(d.kh) * d.kw);
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < d.c; ++c) {
        for (int yy = 0; yy < d.h; ++yy) {
            for (int xx = 0; xx < d.w; ++xx) {
                double acc = 0.0;
                for (int a = 0; a < d.kh; ++a) {
                    int num = yy - a;
                    if (num < 0 || num % d.sh != 0) continue;
                    int i = num / d.sh;
                    if (i >= d.oh) continue;
                    for (int t = 0; t < d.kw; ++t) {
                        int numw = xx - t;
                        if (numw < 0 || numw % d.sw != 0) continue;
                        int j = numw / d.sw;
                        if (j >= d.ow) continue;
                        acc += gy[idx3(c, i, j, d.oh, d.ow)];
                    }
                }
                gx[idx3(c, yy, xx, d.h, d.w)] += acc * inv;
            }
        }
    }
}

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    int n_out, int n_in) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < n_out; ++o) {
        double acc = b[o];
        const double* wrow = w + static_cast<size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
}

void linear_grad_input(const double* gy, const double* w, double* gx, int n_out, int n_in) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_in; ++i) {
        double acc = 0.0;
        for (int o = 0; o < n_out; ++o) acc += gy[o] * w[static_cast<size_t>(o) * n_in + i];
        gx[i] += acc;
    }
}

void linear_grad_weight(const double* gy, const double* x, double* gw, int n_out, int n_in) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < n_out; ++o) {
        double g = gy[o];
        double* gwrow = gw + static_cast<size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) gwrow[i] += g * x[i];
    }
}

void linear_grad_bias(const double* gy, double* gb, int n_out) {
    for (int o = 0; o < n_out; ++o) gb[o] += gy[o];
}

}  // namespace factormi::kernels::parallel
