#include "crossview/mathops.hpp"

#include <algorithm>
#include <cmath>

#include "crossview/kernels.hpp"

namespace crossview {

Vec affine(const Vec& x, const Matrix& w, const Vec& b) {
    require(x.size() == w.rows, "affine: x has length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(w.rows));
    require(b.size() == w.cols, "affine: b has length " + std::to_string(b.size()) +
                                    ", expected " + std::to_string(w.cols));
    const auto& k = kernels::active();
    Vec y = b;
    for (std::size_t i = 0; i < w.rows; ++i) {
        k.axpy(x[i], w.row(i), y.data(), w.cols);
    }
    return y;
}

Vec relu(const Vec& x) {
    Vec out(x.size());
    kernels::active().relu(x.data(), out.data(), x.size());
    return out;
}

Vec log_softmax(const Vec& logits) {
    require(!logits.empty(), "log_softmax: empty input");
    if (!all_finite(logits)) throw NumericError("log_softmax: non-finite input");
    const double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double v : logits) sum += std::exp(v - hi);
    const double lse = hi + std::log(sum);
    Vec out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Matrix& m) { return all_finite(m.data); }

}  // namespace crossview
