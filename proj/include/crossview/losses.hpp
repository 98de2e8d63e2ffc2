#pragma once
// Loss values and their analytic gradients. Each loss differentiates the
// averaged expression it computes, so gradients check against central
// finite differences exactly; the per-identity averaging factors that the
// per-pair textbook forms omit are absorbed here rather than into the
// learning rate.
//
// Embedding batches are passed flat: `embeddings[k]` belongs to identity
// `ids[k]` seen from view `views[k]`. Identities missing from one of the
// two views contribute no cross-view terms and are counted in `skipped`.

#include <vector>

#include "crossview/matrix.hpp"

namespace crossview {

enum class Phase { Warmup, CvEc, CvCl };

const char* phase_name(Phase p);

// Per-identity class centers: one global center and one per view.
struct CenterBank {
    int embed_dim = 0;
    std::vector<Vec> global;                 // [identity]
    std::vector<std::vector<Vec>> per_view;  // [view][identity]

    int num_identities() const { return static_cast<int>(global.size()); }
    int num_views() const { return static_cast<int>(per_view.size()); }
};

struct LossReport {
    std::vector<double> softmax_per_view;
    double cv_ec = 0.0;
    double cv_cl = 0.0;
    double center = 0.0;
    double joint = 0.0;
    Phase phase = Phase::Warmup;
};

struct SoftmaxResult {
    double value = 0.0;                  // summed over the batch
    std::vector<Vec> grad_logits;        // per sample: softmax - onehot
};

SoftmaxResult softmax_loss(const std::vector<Vec>& logits_batch, const std::vector<int>& labels,
                           int num_classes);

struct CvEcResult {
    double value = 0.0;
    std::vector<Vec> grads;  // per embedding
    int skipped_identities = 0;
};

// Mean over identities (present in both views) of the mean squared distance
// between all cross-view same-identity embedding pairs, halved. Views must
// be labeled 0 and 1.
CvEcResult cv_ec(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                 const std::vector<int>& views);

struct CenterLossResult {
    double value = 0.0;
    std::vector<Vec> grads;
};

// Classic center loss against global centers only.
CenterLossResult center_loss(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                             const std::vector<Vec>& centers);

struct CvClResult {
    double value = 0.0;
    std::vector<Vec> grads;                          // per embedding
    std::vector<Vec> center_grads_global;            // [identity], zero if untouched
    std::vector<std::vector<Vec>> center_grads_view; // [view][identity]
    int skipped_identities = 0;
};

// Center loss extended per view: each embedding is penalized against its
// view center and the global center.
CvClResult cv_cl(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                 const std::vector<int>& views, const CenterBank& bank);

double joint_loss_l1(const std::vector<double>& softmax_values, double cv_ec_value, double lambda1);
double joint_loss_l2(const std::vector<double>& softmax_values, double cv_cl_value, double lambda2);

// Per-view centers are view means (global mean substituted where a view is
// empty); global centers are all-sample means.
CenterBank init_centers(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                        const std::vector<int>& views, int num_identities, int num_views);

// The cv_ec average evaluated over a full sample set. For more than two
// views, the per-identity term is the mean over all view pairs present.
double cross_view_intra_class_distance(const std::vector<Vec>& embeddings,
                                       const std::vector<int>& ids,
                                       const std::vector<int>& views);

}  // namespace crossview
