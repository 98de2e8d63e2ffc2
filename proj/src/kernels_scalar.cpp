// Scalar reference kernels. These define the semantics the SIMD variants
// must reproduce; keep them boring.

#include "crossview/kernels.hpp"

#include <cmath>

namespace crossview::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc = std::fma(a[i], b[i], acc);
    return acc;
}

double sqdist_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc = std::fma(d, d, acc);
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_scalar(const double* pre, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

void sgd_update_scalar(double* theta, double* vel, const double* grad, std::size_t n,
                       double momentum, double lr, double weight_decay) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = std::fma(weight_decay, theta[i], grad[i]);
        const double v = std::fma(momentum, vel[i], -lr * g);
        vel[i] = v;
        theta[i] += v;
    }
}

}  // namespace

const Backend& scalar() {
    static const Backend backend{
        "scalar",       dot_scalar,           sqdist_scalar,     axpy_scalar,
        scale_scalar,   relu_scalar,          relu_backward_scalar, sgd_update_scalar,
    };
    return backend;
}

}  // namespace crossview::kernels
