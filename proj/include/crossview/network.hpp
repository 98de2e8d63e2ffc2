#pragma once
// View-specific feature extractor: a small dense network producing an
// embedding, plus a linear classifier head. Forward caches everything
// backward needs; backward applies the chain rule by hand.

#include <cstdint>
#include <string>
#include <vector>

#include "crossview/matrix.hpp"

namespace crossview {

struct DenseLayer {
    Matrix weight;  // in_dim x out_dim
    Vec bias;       // out_dim
};

struct ViewNetwork {
    int view = 0;
    std::vector<DenseLayer> layers;  // ReLU after every layer except the last
    Matrix head_weight;              // embed_dim x num_classes
    Vec head_bias;                   // num_classes

    int input_dim() const { return static_cast<int>(layers.front().weight.rows); }
    int embed_dim() const { return static_cast<int>(layers.back().weight.cols); }
    int num_classes() const { return static_cast<int>(head_weight.cols); }
};

struct ForwardTape {
    Vec input;
    std::vector<Vec> pre_activations;  // per layer, before ReLU
    std::vector<Vec> activations;      // per layer, after ReLU (last = embedding)
};

struct ForwardResult {
    Vec embedding;
    Vec logits;
    ForwardTape tape;
};

// Gradients shaped like the parameters they belong to.
struct ParamGrads {
    std::vector<DenseLayer> layers;
    Matrix head_weight;
    Vec head_bias;
};

// Scaled-uniform (Glorot) weights, zero biases. The view label is metadata
// only: equal seeds give equal parameters regardless of view, so all view
// networks start from a shared initialization.
ViewNetwork init_network(int view, int input_dim, const std::vector<int>& hidden_dims,
                         int embed_dim, int num_classes, std::uint64_t seed);

ForwardResult forward(const ViewNetwork& net, const Vec& features);

// Embedding only, no tape. Same arithmetic as forward.
Vec embed(const ViewNetwork& net, const Vec& features);

ParamGrads zero_grads_like(const ViewNetwork& net);

// Accumulates d(loss)/d(params) into `acc` for one sample, given the
// gradient flowing into the embedding and into the logits.
void backward_into(const ViewNetwork& net, const ForwardTape& tape, const Vec& grad_embedding,
                   const Vec& grad_logits, ParamGrads& acc);

ParamGrads backward(const ViewNetwork& net, const ForwardTape& tape, const Vec& grad_embedding,
                    const Vec& grad_logits);

bool all_finite(const ParamGrads& grads);

// Text checkpoint, `CVSE-CKPT v1`. Values printed with 17 significant
// digits so save/load round-trips bit-exactly.
void save_checkpoint(const ViewNetwork& net, const std::string& path);
ViewNetwork load_checkpoint(const std::string& path);

}  // namespace crossview
