#pragma once
// Re-identification evaluation: squared-Euclidean distance matrices, CMC
// curves, mAP, and the probe/gallery protocols. All operations are pure;
// ranking ties break by gallery index so results are reproducible.

#include <cstdint>
#include <string>
#include <vector>

#include "crossview/dataset.hpp"
#include "crossview/network.hpp"

namespace crossview {

struct DistanceMatrix {
    std::size_t rows = 0;  // probes
    std::size_t cols = 0;  // gallery
    std::vector<double> entries;  // row-major
    std::vector<int> probe_ids;
    std::vector<int> gallery_ids;

    double at(std::size_t p, std::size_t g) const { return entries[p * cols + g]; }
};

enum class Protocol { SingleShot, MultiShot, SingleQuery, MultiQuery };

Protocol protocol_from_string(const std::string& name);
const char* protocol_name(Protocol p);

struct EvalConfig {
    Protocol protocol = Protocol::MultiShot;
    int trials = 10;             // single-shot gallery draws
    int probe_view = 0;
    int gallery_view = 1;        // -1 pools every non-probe view
    bool normalize = false;      // L2-normalize embeddings before matching
    std::vector<int> ranks{1, 5, 10, 20};
    std::uint64_t seed = 1;
};

struct EvalReport {
    std::vector<double> cmc;      // mean over trials, rank 1..gallery size
    std::vector<int> ranks;
    std::vector<double> rank_accuracy;
    double map = 0.0;
    double crossview_distance = 0.0;
    int trials = 1;

    void save_csv(const std::string& path) const;
    void save_cmc_csv(const std::string& path) const;
    std::string table() const;
};

// Each sample embedded by its own view's network; views without a network
// fall back to `fallback` (the multi-view public network) when given.
std::vector<Vec> embed_all(const std::vector<ViewNetwork>& nets, const Dataset& ds,
                           bool normalize, const ViewNetwork* fallback = nullptr);

DistanceMatrix distances(const std::vector<Vec>& probes, const std::vector<int>& probe_ids,
                         const std::vector<Vec>& gallery, const std::vector<int>& gallery_ids);

// cmc[k] = fraction of probes whose first same-identity gallery item sits
// within the top k+1 by ascending distance.
std::vector<double> cmc(const DistanceMatrix& dm);

// AP per probe = mean over its relevant gallery items of the precision at
// that item's rank; mAP = mean over probes.
double mean_ap(const DistanceMatrix& dm);

EvalReport evaluate_protocol(const std::vector<ViewNetwork>& nets, const Dataset& test,
                             const EvalConfig& cfg, const ViewNetwork* fallback = nullptr);

}  // namespace crossview
