#include "crossview/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "crossview/rng.hpp"

namespace crossview {

namespace {

void validate(const GenSpec& s) {
    require(s.identities >= 1, "generate: identities must be >= 1");
    require(s.views >= 1, "generate: views must be >= 1");
    require(s.samples_per_identity_per_view >= 1, "generate: samples per identity/view must be >= 1");
    require(s.latent_dim >= 1, "generate: latent_dim must be >= 1");
    require(s.feature_dim >= 1, "generate: feature_dim must be >= 1");
    require(s.noise_sigma >= 0.0, "generate: noise_sigma must be >= 0");
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale, SeededRng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * rng.gaussian();
    return m;
}

}  // namespace

Dataset generate(const GenSpec& spec) {
    validate(spec);
    const std::size_t d = static_cast<std::size_t>(spec.feature_dim);
    const std::size_t l = static_cast<std::size_t>(spec.latent_dim);
    const double col_scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));

    SeededRng latent_rng(derive_seed(spec.seed, "gen/latent"));
    std::vector<Vec> latents(spec.identities);
    for (auto& z : latents) {
        z.resize(l);
        for (double& v : z) v = latent_rng.gaussian();
    }

    // Shared base map plus a per-view perturbation scaled by
    // view_transform_scale; the per-view bias is pure perturbation.
    SeededRng base_rng(derive_seed(spec.seed, "gen/base"));
    const Matrix base = gaussian_matrix(d, l, col_scale, base_rng);
    std::vector<Matrix> view_maps(spec.views);
    std::vector<Vec> view_bias(spec.views);
    for (int v = 0; v < spec.views; ++v) {
        SeededRng view_rng(derive_seed(spec.seed, "gen/view", static_cast<std::uint64_t>(v)));
        Matrix delta = gaussian_matrix(d, l, col_scale, view_rng);
        view_maps[v] = base;
        for (std::size_t i = 0; i < delta.data.size(); ++i) {
            view_maps[v].data[i] += spec.view_transform_scale * delta.data[i];
        }
        view_bias[v].resize(d);
        for (double& b : view_bias[v]) b = spec.view_transform_scale * view_rng.gaussian();
    }

    SeededRng noise_rng(derive_seed(spec.seed, "gen/noise"));
    Dataset ds;
    ds.num_identities = spec.identities;
    ds.num_views = spec.views;
    ds.feature_dim = spec.feature_dim;
    ds.samples.reserve(static_cast<std::size_t>(spec.identities) * spec.views *
                       spec.samples_per_identity_per_view);
    for (int i = 0; i < spec.identities; ++i) {
        for (int v = 0; v < spec.views; ++v) {
            for (int k = 0; k < spec.samples_per_identity_per_view; ++k) {
                Sample s;
                s.identity = i;
                s.view = v;
                s.features = view_bias[v];
                const Matrix& a = view_maps[v];
                for (std::size_t r = 0; r < d; ++r) {
                    double acc = s.features[r];
                    for (std::size_t c = 0; c < l; ++c) acc += a.at(r, c) * latents[i][c];
                    s.features[r] = acc;
                }
                if (spec.noise_sigma > 0.0) {
                    for (double& f : s.features) f += spec.noise_sigma * noise_rng.gaussian();
                }
                ds.samples.push_back(std::move(s));
            }
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    Dataset ds;
    std::string line;
    int line_no = 0;
    int dim = -1;
    int max_id = -1;
    int max_view = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() < 3) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected `identity,view,f1,...`, got " + line);
        }
        auto parse_int = [&](const std::string& s, const char* what) {
            char* end = nullptr;
            errno = 0;
            const long v = std::strtol(s.c_str(), &end, 10);
            if (errno != 0 || end == s.c_str() || *end != '\0' || v < 0) {
                throw ValidationError(path + ":" + std::to_string(line_no) + ": bad " +
                                      what + " field `" + s + "`");
            }
            return static_cast<int>(v);
        };
        Sample s;
        s.identity = parse_int(fields[0], "identity");
        s.view = parse_int(fields[1], "view");
        s.features.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (errno != 0 || end == fields[i].c_str() || *end != '\0' || !std::isfinite(v)) {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": non-numeric feature `" + fields[i] + "`");
            }
            s.features.push_back(v);
        }
        const int row_dim = static_cast<int>(s.features.size());
        if (dim < 0) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": row has " +
                                  std::to_string(row_dim) + " features, expected " +
                                  std::to_string(dim));
        }
        max_id = std::max(max_id, s.identity);
        max_view = std::max(max_view, s.view);
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw ValidationError(path + ": dataset file is empty");

    ds.num_identities = max_id + 1;
    ds.num_views = max_view + 1;
    ds.feature_dim = dim;

    std::vector<char> seen(static_cast<std::size_t>(ds.num_identities), 0);
    for (const Sample& s : ds.samples) seen[s.identity] = 1;
    for (int i = 0; i < ds.num_identities; ++i) {
        if (!seen[i]) {
            throw ValidationError(path + ": identity " + std::to_string(i) +
                                  " has no samples (labels must be dense 0..M-1)");
        }
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    char buf[32];
    for (const Sample& s : ds.samples) {
        out << s.identity << ',' << s.view;
        for (const double f : s.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", f);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing dataset file: " + path);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
    require(ds.num_identities >= 2, "split: need at least 2 identities");
    int train_count = 0;
    if (spec.mode == SplitSpec::Mode::HalfIdentity) {
        train_count = ds.num_identities / 2;
    } else {
        train_count = spec.train_identities;
        require(train_count >= 1 && train_count < ds.num_identities,
                "split: train_identities must be in [1, M-1]");
    }

    std::vector<int> ids(ds.num_identities);
    std::iota(ids.begin(), ids.end(), 0);
    SeededRng rng(derive_seed(spec.seed, "split"));
    rng.shuffle(ids);

    std::set<int> train_ids(ids.begin(), ids.begin() + train_count);

    // Dense relabeling by ascending original identity.
    std::vector<int> relabel(ds.num_identities, -1);
    int next_train = 0, next_test = 0;
    for (int i = 0; i < ds.num_identities; ++i) {
        relabel[i] = train_ids.count(i) ? next_train++ : next_test++;
    }

    Dataset train, test;
    train.num_views = test.num_views = ds.num_views;
    train.feature_dim = test.feature_dim = ds.feature_dim;
    train.num_identities = train_count;
    test.num_identities = ds.num_identities - train_count;
    for (const Sample& s : ds.samples) {
        Sample copy = s;
        copy.identity = relabel[s.identity];
        (train_ids.count(s.identity) ? train : test).samples.push_back(std::move(copy));
    }
    return {std::move(train), std::move(test)};
}

IdentityViewIndex::IdentityViewIndex(const Dataset& ds)
    : num_identities_(ds.num_identities),
      num_views_(ds.num_views),
      lists_(static_cast<std::size_t>(ds.num_identities) * ds.num_views) {
    for (std::size_t pos = 0; pos < ds.samples.size(); ++pos) {
        const Sample& s = ds.samples[pos];
        lists_[static_cast<std::size_t>(s.identity) * num_views_ + s.view].push_back(
            static_cast<int>(pos));
    }
}

std::vector<int> IdentityViewIndex::identities_in_all_views() const {
    std::vector<int> out;
    for (int i = 0; i < num_identities_; ++i) {
        bool everywhere = true;
        for (int v = 0; v < num_views_; ++v) {
            if (count(i, v) == 0) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) out.push_back(i);
    }
    return out;
}

}  // namespace crossview
