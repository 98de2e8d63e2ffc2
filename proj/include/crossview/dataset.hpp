#pragma once
// Multi-view identity data: seeded synthetic generation, CSV ingest, and
// identity-disjoint protocol splits. Datasets are immutable once built.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crossview/matrix.hpp"

namespace crossview {

struct Sample {
    int identity = 0;
    int view = 0;
    Vec features;
};

struct Dataset {
    std::vector<Sample> samples;
    int num_identities = 0;
    int num_views = 0;
    int feature_dim = 0;
};

// Synthetic model: one latent code per identity, one fixed affine
// distortion per view, Gaussian observation noise. At
// view_transform_scale = 0 every view shares the base map, so all views of
// an identity coincide (up to noise).
struct GenSpec {
    int identities = 40;
    int views = 2;
    int samples_per_identity_per_view = 6;
    int latent_dim = 16;
    int feature_dim = 32;
    double view_transform_scale = 1.0;
    double noise_sigma = 0.05;
    std::uint64_t seed = 1;
};

struct SplitSpec {
    enum class Mode { HalfIdentity, FixedCounts };
    Mode mode = Mode::HalfIdentity;
    int train_identities = 0;  // fixed-counts mode only
    std::uint64_t seed = 1;
};

Dataset generate(const GenSpec& spec);

// CSV schema: one sample per line, `identity,view,f1,...,fD`, no header.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// Identity-disjoint partition with dense relabeling 0..M'-1 on each side.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

// Sample positions grouped by (identity, view).
class IdentityViewIndex {
public:
    explicit IdentityViewIndex(const Dataset& ds);

    const std::vector<int>& at(int identity, int view) const {
        return lists_[static_cast<std::size_t>(identity) * num_views_ + view];
    }
    int count(int identity, int view) const {
        return static_cast<int>(at(identity, view).size());
    }
    int num_identities() const { return num_identities_; }
    int num_views() const { return num_views_; }

    // Identities present in every view (the ones cross-view terms exist for).
    std::vector<int> identities_in_all_views() const;

private:
    int num_identities_ = 0;
    int num_views_ = 0;
    std::vector<std::vector<int>> lists_;
};

}  // namespace crossview
