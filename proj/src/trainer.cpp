#include "crossview/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "crossview/kernels.hpp"
#include "crossview/mathops.hpp"
#include "crossview/rng.hpp"

namespace crossview {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void format_value(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

std::vector<ViewNetwork> fresh_nets(const Dataset& train, const TrainConfig& cfg) {
    std::vector<ViewNetwork> nets;
    for (int v = 0; v < 2; ++v) {
        nets.push_back(init_network(v, train.feature_dim, cfg.hidden_dims, cfg.embed_dim,
                                    train.num_identities, cfg.seed));
    }
    return nets;
}

}  // namespace

void validate(const TrainConfig& cfg) {
    require(cfg.lambda1 >= 0.0 && cfg.lambda2 >= 0.0, "config: lambdas must be >= 0");
    require(cfg.learning_rate > 0.0, "config: learning_rate must be > 0");
    require(cfg.center_rate > 0.0, "config: center_rate must be > 0");
    require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "config: momentum must be in [0, 1)");
    require(cfg.weight_decay >= 0.0, "config: weight_decay must be >= 0");
    require(cfg.batch_identities >= 1, "config: batch_identities must be >= 1");
    require(cfg.batch_samples_per_view >= 1, "config: batch_samples_per_view must be >= 1");
    require(cfg.eps1 >= 0.0 && cfg.eps2 >= 0.0 && cfg.eps >= 0.0,
            "config: eps thresholds must be >= 0");
    require(cfg.max_epochs_per_phase >= 1, "config: max_epochs_per_phase must be >= 1");
    require(cfg.max_outer_iters >= 1, "config: max_outer_iters must be >= 1");
    require(cfg.warmup_epochs >= 0, "config: warmup_epochs must be >= 0");
    require(cfg.embed_dim >= 1, "config: embed_dim must be >= 1");
    require(cfg.multiview_passes >= 1, "config: multiview_passes must be >= 1");
}

OptimizerState make_optimizer_state(const ViewNetwork& net) {
    return OptimizerState{zero_grads_like(net)};
}

namespace {

void sgd_apply(Vec& theta, Vec& vel, const Vec& grad, const TrainConfig& cfg) {
    kernels::active().sgd_update(theta.data(), vel.data(), grad.data(), theta.size(),
                                 cfg.momentum, cfg.learning_rate, cfg.weight_decay);
}

}  // namespace

void sgd_step(ViewNetwork& net, const ParamGrads& grads, OptimizerState& state,
              const TrainConfig& cfg) {
    if (!all_finite(grads)) throw NumericError("sgd_step: non-finite gradient");
    require(grads.layers.size() == net.layers.size(), "sgd_step: gradient shape mismatch");
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        require(grads.layers[l].weight.same_shape(net.layers[l].weight),
                "sgd_step: gradient shape mismatch");
        sgd_apply(net.layers[l].weight.data, state.velocity.layers[l].weight.data,
                  grads.layers[l].weight.data, cfg);
        sgd_apply(net.layers[l].bias, state.velocity.layers[l].bias, grads.layers[l].bias, cfg);
    }
    sgd_apply(net.head_weight.data, state.velocity.head_weight.data, grads.head_weight.data, cfg);
    sgd_apply(net.head_bias, state.velocity.head_bias, grads.head_bias, cfg);
}

void center_step(CenterBank& bank, const CvClResult& grads, double alpha) {
    require(static_cast<int>(grads.center_grads_global.size()) == bank.num_identities() &&
                static_cast<int>(grads.center_grads_view.size()) == bank.num_views(),
            "center_step: gradient shape mismatch");
    const auto& k = kernels::active();
    const std::size_t dim = static_cast<std::size_t>(bank.embed_dim);
    for (int i = 0; i < bank.num_identities(); ++i) {
        if (!all_finite(grads.center_grads_global[i])) {
            throw NumericError("center_step: non-finite center gradient");
        }
        k.axpy(-alpha, grads.center_grads_global[i].data(), bank.global[i].data(), dim);
        for (int v = 0; v < bank.num_views(); ++v) {
            if (!all_finite(grads.center_grads_view[v][i])) {
                throw NumericError("center_step: non-finite center gradient");
            }
            k.axpy(-alpha, grads.center_grads_view[v][i].data(), bank.per_view[v][i].data(), dim);
        }
    }
}

std::vector<const LogRow*> TrainLog::boundaries() const {
    std::vector<const LogRow*> out;
    for (const LogRow& row : rows) {
        if (row.phase == "init" || row.phase.rfind("end:", 0) == 0) out.push_back(&row);
    }
    return out;
}

void TrainLog::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write train log: " + path);
    out << "epoch,phase";
    for (int v = 0; v < num_views; ++v) out << ",loss_softmax_v" << v;
    out << ",cv_ec,cv_cl,joint,crossview_dist\n";
    for (const LogRow& row : rows) {
        out << row.epoch << ',' << row.phase;
        for (int v = 0; v < num_views; ++v) {
            out << ',';
            format_value(out, v < static_cast<int>(row.softmax_per_view.size())
                                  ? row.softmax_per_view[v]
                                  : kNan);
        }
        out << ',';
        format_value(out, row.cv_ec);
        out << ',';
        format_value(out, row.cv_cl);
        out << ',';
        format_value(out, row.joint);
        out << ',';
        format_value(out, row.crossview);
        out << '\n';
    }
    if (!out) throw IoError("failed writing train log: " + path);
}

std::vector<Batch> compose_batches(const IdentityViewIndex& idx, int batch_identities,
                                   int samples_per_view, SeededRng& rng) {
    require(idx.num_views() == 2, "compose_batches: dataset must have exactly 2 views");
    std::vector<int> eligible = idx.identities_in_all_views();
    if (eligible.empty()) {
        throw ValidationError("compose_batches: no identity present in both views");
    }
    rng.shuffle(eligible);

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < eligible.size();
         start += static_cast<std::size_t>(batch_identities)) {
        Batch batch;
        const std::size_t stop =
            std::min(eligible.size(), start + static_cast<std::size_t>(batch_identities));
        for (std::size_t j = start; j < stop; ++j) {
            BatchGroup group;
            group.identity = eligible[j];
            for (int v = 0; v < 2; ++v) {
                std::vector<int> pool = idx.at(group.identity, v);
                rng.shuffle(pool);
                const std::size_t take =
                    std::min(pool.size(), static_cast<std::size_t>(samples_per_view));
                auto& dst = (v == 0) ? group.view0 : group.view1;
                dst.assign(pool.begin(), pool.begin() + take);
            }
            batch.push_back(std::move(group));
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

BatchGrads compute_batch_grads(const ViewNetwork& net0, const ViewNetwork& net1,
                               const Dataset& ds, const Batch& batch, Phase phase, double lambda,
                               const CenterBank* bank) {
    // Flat order: every view-0 sample in group order, then every view-1
    // sample. Fixed so gradient accumulation is reproducible.
    std::vector<int> positions;
    std::vector<int> ids;
    std::vector<int> views;
    for (int v = 0; v < 2; ++v) {
        for (const BatchGroup& group : batch) {
            for (const int p : (v == 0 ? group.view0 : group.view1)) {
                positions.push_back(p);
                ids.push_back(group.identity);
                views.push_back(v);
            }
        }
    }

    std::vector<ForwardResult> passes;
    std::vector<Vec> embeddings;
    passes.reserve(positions.size());
    embeddings.reserve(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const ViewNetwork& net = (views[k] == 0) ? net0 : net1;
        passes.push_back(forward(net, ds.samples[positions[k]].features));
        embeddings.push_back(passes.back().embedding);
    }

    BatchGrads out;
    out.net0 = zero_grads_like(net0);
    out.net1 = zero_grads_like(net1);

    // Per-view softmax over the batch (Eq. 3 sums over the mini-batch).
    std::vector<Vec> grad_logits(positions.size());
    for (int v = 0; v < 2; ++v) {
        std::vector<Vec> logits;
        std::vector<int> labels;
        std::vector<std::size_t> where;
        for (std::size_t k = 0; k < positions.size(); ++k) {
            if (views[k] != v) continue;
            logits.push_back(passes[k].logits);
            labels.push_back(ids[k]);
            where.push_back(k);
        }
        const int classes = (v == 0) ? net0.num_classes() : net1.num_classes();
        SoftmaxResult sm = softmax_loss(logits, labels, classes);
        (v == 0 ? out.softmax0 : out.softmax1) = sm.value;
        (v == 0 ? out.count0 : out.count1) = static_cast<int>(where.size());
        for (std::size_t j = 0; j < where.size(); ++j) {
            grad_logits[where[j]] = std::move(sm.grad_logits[j]);
        }
    }

    // Constraint path. Gradients are skipped entirely at lambda == 0 so a
    // zero coefficient leaves the softmax path bit-exact.
    std::vector<Vec> emb_grads;
    if (phase == Phase::CvEc) {
        CvEcResult ec = cv_ec(embeddings, ids, views);
        out.constraint = ec.value;
        if (lambda > 0.0) emb_grads = std::move(ec.grads);
    } else if (phase == Phase::CvCl) {
        require(bank != nullptr, "compute_batch_grads: CvCl phase needs a center bank");
        out.cvcl = cv_cl(embeddings, ids, views, *bank);
        out.constraint = out.cvcl.value;
        if (lambda > 0.0) emb_grads = out.cvcl.grads;
    }

    const std::size_t embed_dim = static_cast<std::size_t>(net0.embed_dim());
    Vec zero_emb(embed_dim, 0.0);
    Vec scaled(embed_dim);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const Vec* grad_emb = &zero_emb;
        if (!emb_grads.empty()) {
            scaled.assign(embed_dim, 0.0);
            kernels::active().axpy(lambda, emb_grads[k].data(), scaled.data(), embed_dim);
            grad_emb = &scaled;
        }
        if (views[k] == 0) {
            backward_into(net0, passes[k].tape, *grad_emb, grad_logits[k], out.net0);
        } else {
            backward_into(net1, passes[k].tape, *grad_emb, grad_logits[k], out.net1);
        }
    }
    return out;
}

TrainingDiverged::TrainingDiverged(const std::string& what, std::vector<ViewNetwork> nets,
                                   TrainLog log)
    : NumericError(what), last_good(std::move(nets)), partial_log(std::move(log)) {}

TwoViewTrainer::TwoViewTrainer(std::vector<ViewNetwork> nets, const Dataset& train,
                               const Dataset* heldout, TrainConfig cfg)
    : nets_(std::move(nets)), train_(train), heldout_(heldout), index_(train), cfg_(std::move(cfg)) {
    validate(cfg_);
    require(nets_.size() == 2, "trainer: exactly two view networks expected");
    require(train_.num_views == 2, "trainer: training data must have exactly 2 views");
    require(nets_[0].embed_dim() == nets_[1].embed_dim(), "trainer: embed dims differ");
    if (index_.identities_in_all_views().empty()) {
        throw ValidationError("trainer: training data has no cross-view identity");
    }
    opt_.push_back(make_optimizer_state(nets_[0]));
    opt_.push_back(make_optimizer_state(nets_[1]));
    last_good_ = nets_;
    log_.num_views = 2;
}

struct TwoViewTrainer::FullEval {
    std::vector<double> softmax_means;
    double cv_ec_value = kNan;
    double cv_cl_value = kNan;
    double crossview = kNan;
    double l1 = kNan;
    double l2 = kNan;
};

TwoViewTrainer::FullEval TwoViewTrainer::evaluate_full(const Dataset& ds, bool with_softmax,
                                                       const CenterBank* bank) const {
    std::vector<Vec> embeddings;
    std::vector<int> ids, views;
    embeddings.reserve(ds.samples.size());
    std::vector<double> softmax_sums(2, 0.0);
    std::vector<int> counts(2, 0);
    for (const Sample& s : ds.samples) {
        const ViewNetwork& net = nets_[s.view];
        Vec emb = embed(net, s.features);
        if (with_softmax) {
            const Vec logits = affine(emb, net.head_weight, net.head_bias);
            const SoftmaxResult sm = softmax_loss({logits}, {s.identity}, net.num_classes());
            softmax_sums[s.view] += sm.value;
        }
        ++counts[s.view];
        embeddings.push_back(std::move(emb));
        ids.push_back(s.identity);
        views.push_back(s.view);
    }

    FullEval out;
    out.softmax_means.assign(2, kNan);
    if (with_softmax) {
        for (int v = 0; v < 2; ++v) {
            out.softmax_means[v] = counts[v] > 0 ? softmax_sums[v] / counts[v] : kNan;
        }
    }
    out.cv_ec_value = cv_ec(embeddings, ids, views).value;
    CenterBank fresh;
    const CenterBank* use_bank = bank;
    if (use_bank == nullptr) {
        fresh = init_centers(embeddings, ids, views, ds.num_identities, 2);
        use_bank = &fresh;
    }
    out.cv_cl_value = cv_cl(embeddings, ids, views, *use_bank).value;
    out.crossview = cross_view_intra_class_distance(embeddings, ids, views);
    if (with_softmax) {
        out.l1 = joint_loss_l1(out.softmax_means, out.cv_ec_value, cfg_.lambda1);
        out.l2 = joint_loss_l2(out.softmax_means, out.cv_cl_value, cfg_.lambda2);
    }
    return out;
}

void TwoViewTrainer::snapshot(const std::string& label) {
    // The trained bank is current only right after a CV-CL phase; other
    // snapshots value CV-CL against centers freshly computed from the
    // current networks, which is what the next phase would start from.
    const CenterBank* bank = (bank_ready_ && label == "end:cvcl") ? &bank_ : nullptr;
    const FullEval train_eval = evaluate_full(train_, true, bank);
    LogRow row;
    row.epoch = epoch_counter_;
    row.phase = label;
    row.softmax_per_view = train_eval.softmax_means;
    row.cv_ec = train_eval.cv_ec_value;
    row.cv_cl = train_eval.cv_cl_value;
    row.joint = train_eval.l1 + train_eval.l2;
    row.crossview = train_eval.crossview;
    log_.rows.push_back(std::move(row));
    if (heldout_ != nullptr) {
        const FullEval held = evaluate_full(*heldout_, false, nullptr);
        LogRow hrow;
        hrow.epoch = epoch_counter_;
        hrow.phase = label + "/heldout";
        hrow.softmax_per_view = held.softmax_means;
        hrow.cv_ec = held.cv_ec_value;
        hrow.cv_cl = held.cv_cl_value;
        hrow.joint = kNan;
        hrow.crossview = held.crossview;
        log_.rows.push_back(std::move(hrow));
    }
}

void TwoViewTrainer::check_finite_or_abort(const BatchGrads& grads, Phase phase) {
    if (all_finite(grads.net0) && all_finite(grads.net1) && std::isfinite(grads.softmax0) &&
        std::isfinite(grads.softmax1) &&
        (phase == Phase::Warmup || std::isfinite(grads.constraint))) {
        return;
    }
    throw TrainingDiverged("training diverged (non-finite loss or gradient) during phase " +
                               std::string(phase_name(phase)) + " at epoch " +
                               std::to_string(epoch_counter_),
                           last_good_, log_);
}

double TwoViewTrainer::run_epoch(Phase phase) {
    SeededRng rng(derive_seed(cfg_.seed, "epoch", static_cast<std::uint64_t>(epoch_counter_)));
    const std::vector<Batch> batches =
        compose_batches(index_, cfg_.batch_identities, cfg_.batch_samples_per_view, rng);

    const double lambda = (phase == Phase::CvEc) ? cfg_.lambda1
                          : (phase == Phase::CvCl) ? cfg_.lambda2
                                                   : 0.0;
    double softmax_sum0 = 0.0, softmax_sum1 = 0.0;
    int count0 = 0, count1 = 0;
    double constraint_sum = 0.0;
    for (const Batch& batch : batches) {
        BatchGrads grads = compute_batch_grads(nets_[0], nets_[1], train_, batch, phase, lambda,
                                               bank_ready_ ? &bank_ : nullptr);
        check_finite_or_abort(grads, phase);
        sgd_step(nets_[0], grads.net0, opt_[0], cfg_);
        sgd_step(nets_[1], grads.net1, opt_[1], cfg_);
        if (phase == Phase::CvCl && !cfg_.freeze_centers) {
            center_step(bank_, grads.cvcl, cfg_.center_rate);
        }
        softmax_sum0 += grads.softmax0;
        softmax_sum1 += grads.softmax1;
        count0 += grads.count0;
        count1 += grads.count1;
        constraint_sum += grads.constraint;
    }

    LogRow row;
    row.epoch = epoch_counter_;
    row.phase = phase_name(phase);
    row.softmax_per_view = {softmax_sum0 / count0, softmax_sum1 / count1};
    const double constraint_mean = constraint_sum / static_cast<double>(batches.size());
    row.cv_ec = (phase == Phase::CvEc) ? constraint_mean : kNan;
    row.cv_cl = (phase == Phase::CvCl) ? constraint_mean : kNan;
    double joint = row.softmax_per_view[0] + row.softmax_per_view[1];
    if (phase != Phase::Warmup) joint += lambda * constraint_mean;
    row.joint = joint;

    // Train-set cross-view distance snapshot for convergence monitoring.
    {
        std::vector<Vec> embeddings;
        std::vector<int> ids, views;
        embeddings.reserve(train_.samples.size());
        for (const Sample& s : train_.samples) {
            embeddings.push_back(embed(nets_[s.view], s.features));
            ids.push_back(s.identity);
            views.push_back(s.view);
        }
        row.crossview = cross_view_intra_class_distance(embeddings, ids, views);
    }
    log_.rows.push_back(std::move(row));

    if (heldout_ != nullptr) {
        const FullEval held = evaluate_full(*heldout_, false, nullptr);
        LogRow hrow;
        hrow.epoch = epoch_counter_;
        hrow.phase = std::string(phase_name(phase)) + "/heldout";
        hrow.softmax_per_view = held.softmax_means;
        hrow.cv_ec = held.cv_ec_value;
        hrow.cv_cl = held.cv_cl_value;
        hrow.joint = kNan;
        hrow.crossview = held.crossview;
        log_.rows.push_back(std::move(hrow));
    }

    ++epoch_counter_;
    last_good_ = nets_;
    return joint;
}

void TwoViewTrainer::run_warmup() {
    for (int e = 0; e < cfg_.warmup_epochs; ++e) run_epoch(Phase::Warmup);
}

void TwoViewTrainer::run_phase(Phase phase) {
    require(phase != Phase::Warmup, "run_phase: use run_warmup for warmup");
    if (phase == Phase::CvCl) {
        // Algorithm-1 line: compute the centers from the current networks
        // before the CV-CL loop starts.
        std::vector<Vec> embeddings;
        std::vector<int> ids, views;
        embeddings.reserve(train_.samples.size());
        for (const Sample& s : train_.samples) {
            embeddings.push_back(embed(nets_[s.view], s.features));
            ids.push_back(s.identity);
            views.push_back(s.view);
        }
        bank_ = init_centers(embeddings, ids, views, train_.num_identities, 2);
        bank_ready_ = true;
    }
    const double eps_phase = (phase == Phase::CvEc) ? cfg_.eps1 : cfg_.eps2;
    for (int e = 0; e < cfg_.max_epochs_per_phase; ++e) {
        const double joint = run_epoch(phase);
        if (joint < eps_phase) break;
    }
}

void TwoViewTrainer::run_iterative() {
    run_warmup();
    snapshot("init");
    for (int outer = 0; outer < cfg_.max_outer_iters; ++outer) {
        run_phase(Phase::CvEc);
        snapshot("end:cvec");
        run_phase(Phase::CvCl);
        snapshot("end:cvcl");
        // Outer check: L1 and L2 re-evaluated on the current parameters.
        const FullEval eval = evaluate_full(train_, true, bank_ready_ ? &bank_ : nullptr);
        if (eval.l1 + eval.l2 < cfg_.eps) break;
    }
}

TrainResult TwoViewTrainer::take_result() {
    TrainResult result;
    result.nets = std::move(nets_);
    result.bank = std::move(bank_);
    result.log = std::move(log_);
    return result;
}

TrainResult train_icv_eccl(const Dataset& train, const Dataset* heldout, const TrainConfig& cfg) {
    TwoViewTrainer trainer(fresh_nets(train, cfg), train, heldout, cfg);
    trainer.run_iterative();
    return trainer.take_result();
}

TrainResult train_single_constraint(const Dataset& train, const Dataset* heldout,
                                    const TrainConfig& cfg, Phase which) {
    require(which == Phase::CvEc || which == Phase::CvCl,
            "train_single_constraint: phase must be CvEc or CvCl");
    TwoViewTrainer trainer(fresh_nets(train, cfg), train, heldout, cfg);
    trainer.run_warmup();
    trainer.snapshot("init");
    trainer.run_phase(which);
    trainer.snapshot(std::string("end:") + phase_name(which));
    return trainer.take_result();
}

TrainResult train_softmax_only(const Dataset& train, const Dataset* heldout,
                               const TrainConfig& cfg) {
    validate(cfg);
    require(train.num_views == 2, "train_softmax_only: training data must have exactly 2 views");
    std::vector<ViewNetwork> nets = fresh_nets(train, cfg);
    std::vector<OptimizerState> opt{make_optimizer_state(nets[0]), make_optimizer_state(nets[1])};
    const IdentityViewIndex index(train);
    if (index.identities_in_all_views().empty()) {
        throw ValidationError("train_softmax_only: training data has no cross-view identity");
    }

    TrainLog log;
    log.num_views = 2;
    const int total_epochs =
        cfg.warmup_epochs + cfg.max_outer_iters * 2 * cfg.max_epochs_per_phase;
    for (int epoch = 0; epoch < total_epochs; ++epoch) {
        SeededRng rng(derive_seed(cfg.seed, "epoch", static_cast<std::uint64_t>(epoch)));
        const std::vector<Batch> batches =
            compose_batches(index, cfg.batch_identities, cfg.batch_samples_per_view, rng);
        double softmax_sum0 = 0.0, softmax_sum1 = 0.0;
        int count0 = 0, count1 = 0;
        for (const Batch& batch : batches) {
            BatchGrads grads =
                compute_batch_grads(nets[0], nets[1], train, batch, Phase::Warmup, 0.0, nullptr);
            if (!all_finite(grads.net0) || !all_finite(grads.net1)) {
                throw NumericError("train_softmax_only: non-finite gradient at epoch " +
                                   std::to_string(epoch));
            }
            sgd_step(nets[0], grads.net0, opt[0], cfg);
            sgd_step(nets[1], grads.net1, opt[1], cfg);
            softmax_sum0 += grads.softmax0;
            softmax_sum1 += grads.softmax1;
            count0 += grads.count0;
            count1 += grads.count1;
        }
        LogRow row;
        row.epoch = epoch;
        row.phase = "warmup";
        row.softmax_per_view = {softmax_sum0 / count0, softmax_sum1 / count1};
        row.cv_ec = kNan;
        row.cv_cl = kNan;
        row.joint = row.softmax_per_view[0] + row.softmax_per_view[1];
        row.crossview = kNan;
        log.rows.push_back(std::move(row));
    }

    // Final snapshot so ablation comparisons have a boundary row.
    {
        std::vector<Vec> embeddings;
        std::vector<int> ids, views;
        for (const Sample& s : train.samples) {
            embeddings.push_back(embed(nets[s.view], s.features));
            ids.push_back(s.identity);
            views.push_back(s.view);
        }
        LogRow row;
        row.epoch = total_epochs;
        row.phase = "end:softmax";
        row.softmax_per_view = {kNan, kNan};
        row.cv_ec = cv_ec(embeddings, ids, views).value;
        row.cv_cl = kNan;
        row.joint = kNan;
        row.crossview = cross_view_intra_class_distance(embeddings, ids, views);
        log.rows.push_back(std::move(row));
    }
    (void)heldout;

    TrainResult result;
    result.nets = std::move(nets);
    result.log = std::move(log);
    return result;
}

namespace {

Dataset pair_dataset(const Dataset& ds, int probe_view) {
    Dataset out;
    out.num_identities = ds.num_identities;
    out.num_views = 2;
    out.feature_dim = ds.feature_dim;
    out.samples.reserve(ds.samples.size());
    for (const Sample& s : ds.samples) {
        Sample copy = s;
        copy.view = (s.view == probe_view) ? 0 : 1;
        out.samples.push_back(std::move(copy));
    }
    return out;
}

}  // namespace

MultiviewResult train_multiview(const Dataset& train, const TrainConfig& cfg) {
    validate(cfg);
    if (train.num_views == 2) {
        throw ValidationError(
            "train_multiview: dataset has exactly 2 views; use the two-view "
            "iterative trainer instead");
    }
    require(train.num_views >= 3, "train_multiview: need at least 3 views");
    {
        const IdentityViewIndex idx(train);
        for (int v = 0; v < train.num_views; ++v) {
            bool any = false;
            for (int i = 0; i < train.num_identities && !any; ++i) any = idx.count(i, v) > 0;
            if (!any) {
                throw ValidationError("train_multiview: view " + std::to_string(v) +
                                      " has no samples");
            }
        }
    }

    MultiviewResult result;
    result.log.num_views = 2;

    // Shared softmax warmup standing in for pretrained initialization: one
    // network trained on all views pooled, copied into every view network
    // and the public network.
    ViewNetwork warm = init_network(-1, train.feature_dim, cfg.hidden_dims, cfg.embed_dim,
                                    train.num_identities, cfg.seed);
    {
        OptimizerState opt = make_optimizer_state(warm);
        const Dataset pooled = pair_dataset(train, 0);
        const IdentityViewIndex idx(pooled);
        for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
            SeededRng rng(derive_seed(cfg.seed, "mv/warmup", static_cast<std::uint64_t>(epoch)));
            const std::vector<Batch> batches =
                compose_batches(idx, cfg.batch_identities, cfg.batch_samples_per_view, rng);
            for (const Batch& batch : batches) {
                BatchGrads grads =
                    compute_batch_grads(warm, warm, pooled, batch, Phase::Warmup, 0.0, nullptr);
                if (!all_finite(grads.net0) || !all_finite(grads.net1)) {
                    throw NumericError("train_multiview: non-finite warmup gradient");
                }
                // Both pair roles are the same network: one combined step.
                ParamGrads combined = std::move(grads.net0);
                for (std::size_t l = 0; l < combined.layers.size(); ++l) {
                    kernels::active().axpy(1.0, grads.net1.layers[l].weight.data.data(),
                                           combined.layers[l].weight.data.data(),
                                           combined.layers[l].weight.data.size());
                    kernels::active().axpy(1.0, grads.net1.layers[l].bias.data(),
                                           combined.layers[l].bias.data(),
                                           combined.layers[l].bias.size());
                }
                kernels::active().axpy(1.0, grads.net1.head_weight.data.data(),
                                       combined.head_weight.data.data(),
                                       combined.head_weight.data.size());
                kernels::active().axpy(1.0, grads.net1.head_bias.data(),
                                       combined.head_bias.data(), combined.head_bias.size());
                sgd_step(warm, combined, opt, cfg);
            }
        }
    }

    result.public_net = warm;
    result.public_net.view = -1;
    result.view_nets.reserve(train.num_views);
    for (int v = 0; v < train.num_views; ++v) {
        result.view_nets.push_back(warm);
        result.view_nets.back().view = v;
    }

    TrainConfig pair_cfg = cfg;
    pair_cfg.warmup_epochs = 0;
    for (int pass = 0; pass < cfg.multiview_passes; ++pass) {
        for (int v = 0; v < train.num_views; ++v) {
            pair_cfg.seed = derive_seed(cfg.seed, "mv/pair",
                                        static_cast<std::uint64_t>(pass) * train.num_views + v);
            const Dataset pair = pair_dataset(train, v);
            std::vector<ViewNetwork> pair_nets;
            pair_nets.push_back(std::move(result.view_nets[v]));
            pair_nets.push_back(std::move(result.public_net));
            TwoViewTrainer trainer(std::move(pair_nets), pair, nullptr, pair_cfg);
            trainer.run_iterative();
            TrainResult pair_result = trainer.take_result();
            result.view_nets[v] = std::move(pair_result.nets[0]);
            result.view_nets[v].view = v;
            result.public_net = std::move(pair_result.nets[1]);
            result.public_net.view = -1;
            for (const LogRow& row : pair_result.log.rows) result.log.rows.push_back(row);
        }
    }
    return result;
}

}  // namespace crossview
