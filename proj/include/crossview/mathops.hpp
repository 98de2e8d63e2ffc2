#pragma once
// Core dense operations: the affine map, ReLU, and a numerically stable
// log-softmax. All pure functions over immutable inputs.

#include "crossview/matrix.hpp"

namespace crossview {

// y = W^T x + b. W is in_dim x out_dim (columns are per-output weights),
// x has length in_dim, b and the result have length out_dim.
Vec affine(const Vec& x, const Matrix& w, const Vec& b);

// Elementwise max(0, x).
Vec relu(const Vec& x);

// logits - logSumExp(logits), stabilized by a max shift. Throws
// NumericError on non-finite input.
Vec log_softmax(const Vec& logits);

bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

}  // namespace crossview
