#pragma once
// Training: heavy-ball SGD, the CV-EC and CV-CL phases, their iterative
// alternation, and the one-to-others multi-view reduction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossview/dataset.hpp"
#include "crossview/losses.hpp"
#include "crossview/network.hpp"

namespace crossview {

struct TrainConfig {
    double lambda1 = 0.1;
    double lambda2 = 0.1;
    double learning_rate = 1e-4;   // mu
    double center_rate = 1e-3;     // alpha
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int batch_identities = 8;      // P identities per batch
    int batch_samples_per_view = 2;  // up to K samples per identity per view
    double eps1 = 0.0;             // CV-EC phase stop threshold on L1
    double eps2 = 0.0;             // CV-CL phase stop threshold on L2
    double eps = 0.0;              // outer stop threshold on L1 + L2
    int max_epochs_per_phase = 30;
    int max_outer_iters = 2;
    int warmup_epochs = 5;
    std::vector<int> hidden_dims{64, 64};
    int embed_dim = 32;
    bool freeze_centers = false;
    bool normalize_eval = false;
    int multiview_passes = 1;
    std::uint64_t seed = 1;
};

void validate(const TrainConfig& cfg);

// Velocity buffers, one set per network, shaped like its parameters.
struct OptimizerState {
    ParamGrads velocity;
};

OptimizerState make_optimizer_state(const ViewNetwork& net);

// v := momentum*v - mu*(g + weight_decay*theta); theta := theta + v.
// Throws NumericError if any gradient is non-finite.
void sgd_step(ViewNetwork& net, const ParamGrads& grads, OptimizerState& state,
              const TrainConfig& cfg);

// C := C - alpha * dL_cvcl/dC for every center with a gradient. The center
// update rate is independent of lambda2.
void center_step(CenterBank& bank, const CvClResult& grads, double alpha);

struct LogRow {
    int epoch = 0;
    std::string phase;  // "warmup"/"cvec"/"cvcl", suffix "/heldout", or "init"/"end:<phase>"
    std::vector<double> softmax_per_view;  // nan where not computed
    double cv_ec = 0.0;
    double cv_cl = 0.0;
    double joint = 0.0;
    double crossview = 0.0;
};

struct TrainLog {
    int num_views = 2;
    std::vector<LogRow> rows;

    // Snapshot rows written at phase boundaries ("init", "end:cvec", ...),
    // train split only. Their order mirrors the optimization schedule.
    std::vector<const LogRow*> boundaries() const;

    void save_csv(const std::string& path) const;
};

// One batch: identity-balanced groups with samples from both views.
struct BatchGroup {
    int identity = 0;
    std::vector<int> view0;  // sample positions
    std::vector<int> view1;
};
using Batch = std::vector<BatchGroup>;

// Identity-balanced epoch plan: eligible identities (present in both views)
// shuffled and chunked into groups of P; per identity up to K samples per
// view, chosen by per-epoch shuffle.
std::vector<Batch> compose_batches(const IdentityViewIndex& idx, int batch_identities,
                                   int samples_per_view, SeededRng& rng);

// Gradients for one batch: per-view softmax plus, depending on phase,
// lambda-weighted CV-EC or CV-CL embedding gradients. Exposed so the
// softmax-path/constraint-path decomposition is testable.
struct BatchGrads {
    ParamGrads net0;
    ParamGrads net1;
    double softmax0 = 0.0;  // batch sums
    double softmax1 = 0.0;
    int count0 = 0;
    int count1 = 0;
    double constraint = 0.0;  // cv_ec or cv_cl value (unweighted)
    CvClResult cvcl;          // center grads when phase == CvCl
};

BatchGrads compute_batch_grads(const ViewNetwork& net0, const ViewNetwork& net1,
                               const Dataset& ds, const Batch& batch, Phase phase, double lambda,
                               const CenterBank* bank);

// Thrown when a loss or gradient goes non-finite; carries the networks as
// of the last completed epoch.
struct TrainingDiverged : NumericError {
    TrainingDiverged(const std::string& what, std::vector<ViewNetwork> nets, TrainLog log);
    std::vector<ViewNetwork> last_good;
    TrainLog partial_log;
};

struct TrainResult {
    std::vector<ViewNetwork> nets;
    CenterBank bank;
    TrainLog log;
};

// Two-view training driver. Owns the networks and the log; the free
// functions below cover the common schedules.
class TwoViewTrainer {
public:
    TwoViewTrainer(std::vector<ViewNetwork> nets, const Dataset& train, const Dataset* heldout,
                   TrainConfig cfg);

    // Softmax-only epochs standing in for pretrained initialization.
    void run_warmup();

    // One constraint phase: epochs until the phase loss drops below
    // eps1/eps2 or max_epochs_per_phase is reached. CvCl re-initializes
    // centers from current embeddings first.
    void run_phase(Phase phase);

    // Full iterative schedule: warmup, then alternate CV-EC / CV-CL until
    // L1 + L2 < eps or max_outer_iters.
    void run_iterative();

    void snapshot(const std::string& label);

    TrainResult take_result();
    const std::vector<ViewNetwork>& nets() const { return nets_; }
    const TrainLog& log() const { return log_; }
    const CenterBank& bank() const { return bank_; }

private:
    struct FullEval;
    FullEval evaluate_full(const Dataset& ds, bool with_softmax, const CenterBank* bank) const;
    double run_epoch(Phase phase);
    void check_finite_or_abort(const BatchGrads& grads, Phase phase);

    std::vector<ViewNetwork> nets_;
    std::vector<OptimizerState> opt_;
    const Dataset& train_;
    const Dataset* heldout_;
    IdentityViewIndex index_;
    TrainConfig cfg_;
    CenterBank bank_;
    bool bank_ready_ = false;
    int epoch_counter_ = 0;
    TrainLog log_;
    std::vector<ViewNetwork> last_good_;
};

// Algorithm-1 schedule on fresh networks (or use the TwoViewTrainer with
// your own). Requires a two-view dataset with cross-view identities.
TrainResult train_icv_eccl(const Dataset& train, const Dataset* heldout, const TrainConfig& cfg);

// Warmup plus a single constraint phase; the Table-VIII style ablations.
TrainResult train_single_constraint(const Dataset& train, const Dataset* heldout,
                                    const TrainConfig& cfg, Phase which);

// Independent per-view softmax training over the identical schedule and
// batch stream, with no constraint machinery at all. Ignores the eps
// thresholds (runs the full epoch schedule); with the thresholds at 0 the
// iterative trainer at lambda1 = lambda2 = 0 and frozen centers matches
// this parameter-for-parameter.
TrainResult train_softmax_only(const Dataset& train, const Dataset* heldout,
                               const TrainConfig& cfg);

struct MultiviewResult {
    std::vector<ViewNetwork> view_nets;
    ViewNetwork public_net;
    TrainLog log;
};

// One-to-others reduction for V >= 3 views: for each view, its samples
// against all other views pooled, trained as a two-view problem between
// the view network and the public network; the public network carries
// across iterations.
MultiviewResult train_multiview(const Dataset& train, const TrainConfig& cfg);

}  // namespace crossview
