#include "crossview/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crossview/kernels.hpp"
#include "crossview/mathops.hpp"

namespace crossview {

namespace {

// identity -> per-view list of positions into the flat embedding array.
using Groups = std::map<int, std::vector<std::vector<int>>>;

Groups group_by_identity(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                         const std::vector<int>& views, int num_views) {
    require(embeddings.size() == ids.size() && ids.size() == views.size(),
            "loss: embeddings/ids/views lengths differ");
    Groups groups;
    for (std::size_t k = 0; k < embeddings.size(); ++k) {
        require(ids[k] >= 0, "loss: negative identity");
        require(views[k] >= 0 && views[k] < num_views,
                "loss: view label " + std::to_string(views[k]) + " out of range");
        auto [it, inserted] = groups.try_emplace(ids[k]);
        if (inserted) it->second.resize(num_views);
        it->second[views[k]].push_back(static_cast<int>(k));
    }
    return groups;
}

Vec sum_of(const std::vector<Vec>& embeddings, const std::vector<int>& positions,
           std::size_t dim) {
    Vec s(dim, 0.0);
    for (const int p : positions) {
        kernels::active().axpy(1.0, embeddings[p].data(), s.data(), dim);
    }
    return s;
}

double sum_sq(const std::vector<Vec>& embeddings, const std::vector<int>& positions,
              std::size_t dim) {
    const auto& k = kernels::active();
    double acc = 0.0;
    for (const int p : positions) acc += k.dot(embeddings[p].data(), embeddings[p].data(), dim);
    return acc;
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Warmup: return "warmup";
        case Phase::CvEc: return "cvec";
        case Phase::CvCl: return "cvcl";
    }
    return "?";
}

SoftmaxResult softmax_loss(const std::vector<Vec>& logits_batch, const std::vector<int>& labels,
                           int num_classes) {
    require(logits_batch.size() == labels.size(), "softmax_loss: batch/labels lengths differ");
    SoftmaxResult out;
    out.grad_logits.reserve(logits_batch.size());
    for (std::size_t n = 0; n < logits_batch.size(); ++n) {
        require(labels[n] >= 0 && labels[n] < num_classes,
                "softmax_loss: label " + std::to_string(labels[n]) + " out of range [0, " +
                    std::to_string(num_classes) + ")");
        require(logits_batch[n].size() == static_cast<std::size_t>(num_classes),
                "softmax_loss: logits length mismatch");
        const Vec logp = log_softmax(logits_batch[n]);
        out.value -= logp[labels[n]];
        Vec grad(logp.size());
        for (std::size_t m = 0; m < logp.size(); ++m) grad[m] = std::exp(logp[m]);
        grad[labels[n]] -= 1.0;
        out.grad_logits.push_back(std::move(grad));
    }
    return out;
}

CvEcResult cv_ec(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                 const std::vector<int>& views) {
    require(!embeddings.empty(), "cv_ec: empty batch");
    const std::size_t dim = embeddings.front().size();
    const Groups groups = group_by_identity(embeddings, ids, views, 2);

    CvEcResult out;
    out.grads.assign(embeddings.size(), Vec(dim, 0.0));

    int paired = 0;
    for (const auto& [id, by_view] : groups) {
        if (!by_view[0].empty() && !by_view[1].empty()) ++paired;
    }
    out.skipped_identities = static_cast<int>(groups.size()) - paired;
    if (paired == 0) throw ValidationError("cv_ec: no identity present in both views");

    const auto& k = kernels::active();
    const double m = static_cast<double>(paired);
    for (const auto& [id, by_view] : groups) {
        const auto& v0 = by_view[0];
        const auto& v1 = by_view[1];
        if (v0.empty() || v1.empty()) continue;
        const double k0 = static_cast<double>(v0.size());
        const double k1 = static_cast<double>(v1.size());
        const Vec s0 = sum_of(embeddings, v0, dim);
        const Vec s1 = sum_of(embeddings, v1, dim);

        // sum_{p,q} ||a_p - b_q||^2 = K1*sum||a||^2 + K0*sum||b||^2 - 2*S0.S1
        const double cross = k1 * sum_sq(embeddings, v0, dim) + k0 * sum_sq(embeddings, v1, dim) -
                             2.0 * k.dot(s0.data(), s1.data(), dim);
        out.value += cross / (k0 * k1);

        // d/dx0_p = (1/(M K0)) x0_p - (1/(M K0 K1)) S1, symmetrically for view 1.
        for (const int p : v0) {
            k.axpy(1.0 / (m * k0), embeddings[p].data(), out.grads[p].data(), dim);
            k.axpy(-1.0 / (m * k0 * k1), s1.data(), out.grads[p].data(), dim);
        }
        for (const int q : v1) {
            k.axpy(1.0 / (m * k1), embeddings[q].data(), out.grads[q].data(), dim);
            k.axpy(-1.0 / (m * k0 * k1), s0.data(), out.grads[q].data(), dim);
        }
    }
    out.value /= 2.0 * m;
    return out;
}

CenterLossResult center_loss(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                             const std::vector<Vec>& centers) {
    require(!embeddings.empty(), "center_loss: empty batch");
    const std::size_t dim = embeddings.front().size();
    std::vector<int> dummy_views(ids.size(), 0);
    const Groups groups = group_by_identity(embeddings, ids, dummy_views, 1);

    CenterLossResult out;
    out.grads.assign(embeddings.size(), Vec(dim, 0.0));
    const double m = static_cast<double>(groups.size());
    const auto& k = kernels::active();
    for (const auto& [id, by_view] : groups) {
        require(id < static_cast<int>(centers.size()), "center_loss: identity " +
                                                           std::to_string(id) + " has no center");
        const Vec& c = centers[id];
        require(c.size() == dim, "center_loss: center dim mismatch");
        const double ki = static_cast<double>(by_view[0].size());
        for (const int p : by_view[0]) {
            out.value += k.sqdist(embeddings[p].data(), c.data(), dim) / ki;
            // d/dx = (1/(M K)) (x - C)
            k.axpy(1.0 / (m * ki), embeddings[p].data(), out.grads[p].data(), dim);
            k.axpy(-1.0 / (m * ki), c.data(), out.grads[p].data(), dim);
        }
    }
    out.value /= 2.0 * m;
    return out;
}

CvClResult cv_cl(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                 const std::vector<int>& views, const CenterBank& bank) {
    require(!embeddings.empty(), "cv_cl: empty batch");
    require(bank.num_views() >= 2, "cv_cl: bank must cover 2 views");
    const std::size_t dim = embeddings.front().size();
    require(bank.embed_dim == static_cast<int>(dim), "cv_cl: bank dim mismatch");
    const Groups groups = group_by_identity(embeddings, ids, views, 2);

    CvClResult out;
    out.grads.assign(embeddings.size(), Vec(dim, 0.0));
    out.center_grads_global.assign(bank.global.size(), Vec(dim, 0.0));
    out.center_grads_view.assign(bank.per_view.size(),
                                 std::vector<Vec>(bank.global.size(), Vec(dim, 0.0)));

    int paired = 0;
    for (const auto& [id, by_view] : groups) {
        require(id < bank.num_identities(),
                "cv_cl: identity " + std::to_string(id) + " missing from center bank");
        if (!by_view[0].empty() && !by_view[1].empty()) ++paired;
    }
    out.skipped_identities = static_cast<int>(groups.size()) - paired;
    if (paired == 0) throw ValidationError("cv_cl: no identity present in both views");

    const auto& k = kernels::active();
    const double m = static_cast<double>(paired);
    for (const auto& [id, by_view] : groups) {
        if (by_view[0].empty() || by_view[1].empty()) continue;
        const Vec& cg = bank.global[id];
        for (int v = 0; v < 2; ++v) {
            const Vec& cv = bank.per_view[v][id];
            const double kv = static_cast<double>(by_view[v].size());
            Vec mean = sum_of(embeddings, by_view[v], dim);
            k.scale(1.0 / kv, mean.data(), dim);
            for (const int p : by_view[v]) {
                out.value += (k.sqdist(embeddings[p].data(), cv.data(), dim) +
                              k.sqdist(embeddings[p].data(), cg.data(), dim)) /
                             kv;
                // d/dx = (1/(M Kv)) [(x - C_v) + (x - C)]
                Vec& g = out.grads[p];
                k.axpy(2.0 / (m * kv), embeddings[p].data(), g.data(), dim);
                k.axpy(-1.0 / (m * kv), cv.data(), g.data(), dim);
                k.axpy(-1.0 / (m * kv), cg.data(), g.data(), dim);
            }
            // d/dC_v = (1/M) (C_v - mean_v); d/dC += (1/M) (C - mean_v)
            Vec& gv = out.center_grads_view[v][id];
            k.axpy(1.0 / m, cv.data(), gv.data(), dim);
            k.axpy(-1.0 / m, mean.data(), gv.data(), dim);
            Vec& gg = out.center_grads_global[id];
            k.axpy(1.0 / m, cg.data(), gg.data(), dim);
            k.axpy(-1.0 / m, mean.data(), gg.data(), dim);
        }
    }
    out.value /= 2.0 * m;
    return out;
}

double joint_loss_l1(const std::vector<double>& softmax_values, double cv_ec_value,
                     double lambda1) {
    require(lambda1 >= 0.0, "joint_loss_l1: lambda1 must be >= 0");
    double total = 0.0;
    for (const double v : softmax_values) total += v;
    return total + lambda1 * cv_ec_value;
}

double joint_loss_l2(const std::vector<double>& softmax_values, double cv_cl_value,
                     double lambda2) {
    require(lambda2 >= 0.0, "joint_loss_l2: lambda2 must be >= 0");
    double total = 0.0;
    for (const double v : softmax_values) total += v;
    return total + lambda2 * cv_cl_value;
}

CenterBank init_centers(const std::vector<Vec>& embeddings, const std::vector<int>& ids,
                        const std::vector<int>& views, int num_identities, int num_views) {
    require(!embeddings.empty(), "init_centers: empty embedding set");
    require(num_views >= 1, "init_centers: need at least one view");
    const std::size_t dim = embeddings.front().size();
    const Groups groups = group_by_identity(embeddings, ids, views, num_views);

    CenterBank bank;
    bank.embed_dim = static_cast<int>(dim);
    bank.global.assign(num_identities, Vec(dim, 0.0));
    bank.per_view.assign(num_views, std::vector<Vec>(num_identities, Vec(dim, 0.0)));

    const auto& k = kernels::active();
    for (int id = 0; id < num_identities; ++id) {
        const auto it = groups.find(id);
        if (it == groups.end()) {
            throw ValidationError("init_centers: identity " + std::to_string(id) +
                                  " has no embeddings");
        }
        const auto& by_view = it->second;
        int total = 0;
        Vec& global = bank.global[id];
        for (int v = 0; v < num_views; ++v) {
            for (const int p : by_view[v]) {
                k.axpy(1.0, embeddings[p].data(), global.data(), dim);
            }
            total += static_cast<int>(by_view[v].size());
        }
        k.scale(1.0 / static_cast<double>(total), global.data(), dim);
        for (int v = 0; v < num_views; ++v) {
            Vec& cv = bank.per_view[v][id];
            if (by_view[v].empty()) {
                cv = global;  // fallback for a view the identity never appears in
                continue;
            }
            cv = sum_of(embeddings, by_view[v], dim);
            k.scale(1.0 / static_cast<double>(by_view[v].size()), cv.data(), dim);
        }
    }
    return bank;
}

double cross_view_intra_class_distance(const std::vector<Vec>& embeddings,
                                       const std::vector<int>& ids,
                                       const std::vector<int>& views) {
    require(!embeddings.empty(), "cross_view_intra_class_distance: empty embedding set");
    int num_views = 0;
    for (const int v : views) num_views = std::max(num_views, v + 1);
    const std::size_t dim = embeddings.front().size();
    const Groups groups = group_by_identity(embeddings, ids, views, num_views);

    const auto& k = kernels::active();
    double value = 0.0;
    int counted = 0;
    for (const auto& [id, by_view] : groups) {
        double pair_mean = 0.0;
        int pairs = 0;
        for (int u = 0; u < num_views; ++u) {
            if (by_view[u].empty()) continue;
            for (int v = u + 1; v < num_views; ++v) {
                if (by_view[v].empty()) continue;
                const double ku = static_cast<double>(by_view[u].size());
                const double kv = static_cast<double>(by_view[v].size());
                const Vec su = sum_of(embeddings, by_view[u], dim);
                const Vec sv = sum_of(embeddings, by_view[v], dim);
                const double cross = kv * sum_sq(embeddings, by_view[u], dim) +
                                     ku * sum_sq(embeddings, by_view[v], dim) -
                                     2.0 * k.dot(su.data(), sv.data(), dim);
                pair_mean += cross / (ku * kv);
                ++pairs;
            }
        }
        if (pairs > 0) {
            value += pair_mean / static_cast<double>(pairs);
            ++counted;
        }
    }
    if (counted == 0) {
        throw ValidationError("cross_view_intra_class_distance: no identity spans two views");
    }
    return value / (2.0 * static_cast<double>(counted));
}

}  // namespace crossview
