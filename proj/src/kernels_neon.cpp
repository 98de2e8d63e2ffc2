// NEON kernel variants for aarch64 (2-lane float64). Mirrors the scalar
// reference the same way the AVX2 file does; see kernels_avx2.cpp.

#if defined(__aarch64__) || defined(_M_ARM64)

#include "crossview/kernels.hpp"

#include <arm_neon.h>
#include <cmath>

namespace crossview::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    const float64x2_t s = vaddq_f64(acc0, acc1);
    double acc = vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
    for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
    return acc;
}

double sqdist_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc0 = vfmaq_f64(acc0, d, d);
    }
    const float64x2_t s = vaddq_f64(acc0, acc1);
    double acc = vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc = std::fma(d, d, acc);
    }
    return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_neon(double alpha, double* x, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

void relu_neon(const double* in, double* out, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vld1q_f64(in + i);
        const uint64x2_t mask = vcgtq_f64(x, zero);
        vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(x))));
    }
    for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_neon(const double* pre, double* grad, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), zero);
        const float64x2_t g = vld1q_f64(grad + i);
        vst1q_f64(grad + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(g))));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

void sgd_update_neon(double* theta, double* vel, const double* grad, std::size_t n,
                     double momentum, double lr, double weight_decay) {
    const float64x2_t mv = vdupq_n_f64(momentum);
    const float64x2_t wdv = vdupq_n_f64(weight_decay);
    const float64x2_t nlrv = vdupq_n_f64(-lr);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t th = vld1q_f64(theta + i);
        const float64x2_t g = vfmaq_f64(vld1q_f64(grad + i), wdv, th);
        const float64x2_t v = vfmaq_f64(vmulq_f64(nlrv, g), mv, vld1q_f64(vel + i));
        vst1q_f64(vel + i, v);
        vst1q_f64(theta + i, vaddq_f64(th, v));
    }
    for (; i < n; ++i) {
        const double g = std::fma(weight_decay, theta[i], grad[i]);
        const double v = std::fma(momentum, vel[i], -lr * g);
        vel[i] = v;
        theta[i] += v;
    }
}

}  // namespace

const Backend& neon_backend() {
    static const Backend backend{
        "neon",     dot_neon,           sqdist_neon,     axpy_neon,
        scale_neon, relu_neon,          relu_backward_neon, sgd_update_neon,
    };
    return backend;
}

}  // namespace crossview::kernels

#endif  // aarch64
