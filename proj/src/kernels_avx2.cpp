// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma on x86-64 only; callers must gate on runtime CPU support
// (see kernels_dispatch.cpp).
//
// Elementwise kernels apply exactly the same per-element operation tree as
// the scalar reference (fma included), so their results are bitwise equal.
// Reductions accumulate in vector lanes and differ from the sequential
// reference only by summation order.

#if defined(__x86_64__) || defined(_M_X64)

#include "crossview/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace crossview::kernels {
namespace {

double hsum(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
    return acc;
}

double sqdist_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc = std::fma(d, d, acc);
    }
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

void relu_avx2(const double* in, double* out, std::size_t n) {
    // cmp+and instead of max_pd: keeps -0.0 inputs bitwise identical to the
    // scalar reference (max_pd would pass -0.0 through).
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(in + i);
        const __m256d mask = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, x));
    }
    for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward_avx2(const double* pre, double* grad, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
    }
}

void sgd_update_avx2(double* theta, double* vel, const double* grad, std::size_t n,
                     double momentum, double lr, double weight_decay) {
    const __m256d mv = _mm256_set1_pd(momentum);
    const __m256d wdv = _mm256_set1_pd(weight_decay);
    const __m256d nlrv = _mm256_set1_pd(-lr);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d th = _mm256_loadu_pd(theta + i);
        const __m256d g = _mm256_fmadd_pd(wdv, th, _mm256_loadu_pd(grad + i));
        const __m256d v = _mm256_fmadd_pd(mv, _mm256_loadu_pd(vel + i), _mm256_mul_pd(nlrv, g));
        _mm256_storeu_pd(vel + i, v);
        _mm256_storeu_pd(theta + i, _mm256_add_pd(th, v));
    }
    for (; i < n; ++i) {
        const double g = std::fma(weight_decay, theta[i], grad[i]);
        const double v = std::fma(momentum, vel[i], -lr * g);
        vel[i] = v;
        theta[i] += v;
    }
}

}  // namespace

const Backend& avx2_backend() {
    static const Backend backend{
        "avx2",     dot_avx2,           sqdist_avx2,     axpy_avx2,
        scale_avx2, relu_avx2,          relu_backward_avx2, sgd_update_avx2,
    };
    return backend;
}

}  // namespace crossview::kernels

#endif  // x86-64
