#pragma once
// Dense double-precision inner-loop kernels.
//
// Every kernel exists as a scalar reference implementation and, where the
// target CPU supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on
// aarch64). The variant is picked once at startup; tests assert the variants
// agree with the scalar reference (bitwise for elementwise kernels, to a
// tight tolerance for reductions, whose summation order differs).
//
// Scalar semantics, which the SIMD variants mirror lane-for-lane:
//   dot(a,b,n)        acc = fma(a[i], b[i], acc) over i in order
//   sqdist(a,b,n)     d = a[i]-b[i]; acc = fma(d, d, acc) over i in order
//   axpy(s,x,y,n)     y[i] = fma(s, x[i], y[i])
//   scale(s,x,n)      x[i] *= s
//   relu(in,out,n)    out[i] = in[i] > 0 ? in[i] : 0
//   relu_backward     grad[i] = pre[i] > 0 ? grad[i] : 0
//   sgd_update        t = fma(wd, theta[i], grad[i]); v = fma(m, vel[i], -lr*t);
//                     vel[i] = v; theta[i] += v

#include <cstddef>
#include <string>
#include <vector>

namespace crossview::kernels {

struct Backend {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sqdist)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    void (*relu)(const double* in, double* out, std::size_t n);
    void (*relu_backward)(const double* pre, double* grad, std::size_t n);
    void (*sgd_update)(double* theta, double* vel, const double* grad, std::size_t n,
                       double momentum, double lr, double weight_decay);
};

// Scalar reference backend, always available.
const Backend& scalar();

// Backend in use. Chosen at first call: the CROSSVIEW_KERNELS environment
// variable ("scalar", "avx2", "neon", "auto") wins, otherwise the best
// variant the CPU supports.
const Backend& active();

// Force a backend by name ("auto" re-runs detection). Throws
// ValidationError on unknown or unsupported names. Not thread-safe;
// intended for startup and tests.
void select(const std::string& name);

// Names of backends usable on this machine (always includes "scalar").
std::vector<std::string> available();

}  // namespace crossview::kernels
