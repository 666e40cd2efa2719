#pragma once

// Gradient-boosted regression trees with squared-error loss.
//
// Each round fits one tree to the current residuals on a row subsample. Splits
// are searched over per-feature histograms (quantile bin edges computed once
// from the training data); the split gain is the reduction of the residual sum
// of squares. Leaves hold learning_rate * mean residual. Training stops after
// n_trees rounds or when the validation RMSE has not improved for
// early_stop_patience rounds; the ensemble is then cut back to the best round.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "parallel.hpp"
#include "phys.hpp"

namespace nliconquer::gbm {

inline constexpr int model_format_version = 1;
inline constexpr const char* model_format_name = "nliconquer-gbm";

struct GbmParams {
    int n_trees = 400;
    int max_depth = 6;
    double learning_rate = 0.1;
    int min_samples_leaf = 20;
    double row_subsample = 0.8;
    int histogram_bins = 256;
    int early_stop_patience = 30;
    std::uint64_t seed = 42;
    unsigned threads = 1;  // not part of the model identity

    void validate() const {
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw DomainError("gbm: learning_rate must be in (0, 1]");
        if (!(row_subsample > 0.0 && row_subsample <= 1.0))
            throw DomainError("gbm: row_subsample must be in (0, 1]");
        if (max_depth < 1) throw DomainError("gbm: max_depth must be >= 1");
        if (n_trees < 0) throw DomainError("gbm: n_trees must be >= 0");
        if (min_samples_leaf < 1) throw DomainError("gbm: min_samples_leaf must be >= 1");
        if (histogram_bins < 2 || histogram_bins > 65536)
            throw DomainError("gbm: histogram_bins must be in [2, 65536]");
        if (early_stop_patience < 1) throw DomainError("gbm: early_stop_patience must be >= 1");
    }
};

inline void to_json(nlohmann::json& j, const GbmParams& p) {
    j = {{"n_trees", p.n_trees},
         {"max_depth", p.max_depth},
         {"learning_rate", p.learning_rate},
         {"min_samples_leaf", p.min_samples_leaf},
         {"row_subsample", p.row_subsample},
         {"histogram_bins", p.histogram_bins},
         {"early_stop_patience", p.early_stop_patience},
         {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, GbmParams& p) {
    p.n_trees = j.value("n_trees", p.n_trees);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
    p.row_subsample = j.value("row_subsample", p.row_subsample);
    p.histogram_bins = j.value("histogram_bins", p.histogram_bins);
    p.early_stop_patience = j.value("early_stop_patience", p.early_stop_patience);
    p.seed = j.value("seed", p.seed);
}

/// Dense row-major matrix view plus targets.
struct Samples {
    std::size_t n_features = 0;
    std::vector<double> x;  // row-major, rows() * n_features
    std::vector<double> y;

    std::size_t rows() const { return y.size(); }
    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * n_features, n_features};
    }
    void push(std::span<const double> features, double target) {
        if (n_features == 0) n_features = features.size();
        if (features.size() != n_features) throw DomainError("gbm: inconsistent feature count");
        x.insert(x.end(), features.begin(), features.end());
        y.push_back(target);
    }
};

struct Tree {
    // Node i: internal if feature[i] >= 0 (go left when x < threshold[i]),
    // otherwise a leaf with weight value[i].
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;
    std::vector<double> gain;

    std::size_t size() const { return feature.size(); }

    double predict(std::span<const double> x) const {
        int n = 0;
        while (feature[static_cast<std::size_t>(n)] >= 0) {
            const auto i = static_cast<std::size_t>(n);
            n = x[static_cast<std::size_t>(feature[i])] < threshold[i] ? left[i] : right[i];
        }
        return value[static_cast<std::size_t>(n)];
    }

    friend bool operator==(const Tree&, const Tree&) = default;
};

/// Inference layout of a whole ensemble in one contiguous node array with
/// siblings adjacent. Leaves loop to themselves (threshold +inf), so a block
/// of trees can be stepped in lockstep for max_depth steps; the independent
/// chains overlap their load latency.
class FlatForest {
public:
    FlatForest() = default;
    explicit FlatForest(const std::vector<Tree>& trees) {
        for (const auto& t : trees) {
            const std::size_t base = nodes_.size();
            roots_.push_back(static_cast<std::uint32_t>(base));
            std::vector<int> queue{0}, depth{0};
            nodes_.emplace_back();
            for (std::size_t q = 0; q < queue.size(); ++q) {
                const auto src = static_cast<std::size_t>(queue[q]);
                const auto self = static_cast<std::uint32_t>(base + q);
                if (t.feature[src] < 0) {
                    nodes_[self] = {std::numeric_limits<double>::infinity(), t.value[src], 0, self};
                    max_depth_ = std::max(max_depth_, depth[q]);
                    continue;
                }
                nodes_[self] = {t.threshold[src], 0.0, static_cast<std::uint32_t>(t.feature[src]),
                                static_cast<std::uint32_t>(base + queue.size())};
                queue.push_back(t.left[src]);
                queue.push_back(t.right[src]);
                depth.push_back(depth[q] + 1);
                depth.push_back(depth[q] + 1);
                nodes_.resize(base + queue.size());
            }
        }
    }

    std::size_t tree_count() const { return roots_.size(); }

    /// init + tree_1 + tree_2 + ..., in the same order as a plain tree walk.
    /// Inputs must be finite (a NaN would step off a leaf).
    double accumulate(double init, std::span<const double> x) const {
        constexpr std::size_t lanes = 16;
        const Node* nodes = nodes_.data();
        double s = init;
        std::size_t t = 0;
        for (; t + lanes <= roots_.size(); t += lanes) {
            std::uint32_t idx[lanes];
            for (std::size_t k = 0; k < lanes; ++k) idx[k] = roots_[t + k];
            for (int d = 0; d < max_depth_; ++d)
                for (std::size_t k = 0; k < lanes; ++k) {
                    const Node& n = nodes[idx[k]];
                    idx[k] = n.next + static_cast<std::uint32_t>(!(x[n.feature] < n.threshold));
                }
            for (std::size_t k = 0; k < lanes; ++k) s += nodes[idx[k]].leaf;
        }
        for (; t < roots_.size(); ++t) {
            std::uint32_t i = roots_[t];
            for (int d = 0; d < max_depth_; ++d)
                i = nodes[i].next + static_cast<std::uint32_t>(!(x[nodes[i].feature] < nodes[i].threshold));
            s += nodes[i].leaf;
        }
        return s;
    }

private:
    struct Node {
        double threshold = 0.0;
        double leaf = 0.0;
        std::uint32_t feature = 0;
        std::uint32_t next = 0;  // left child (right is next + 1), or self for a leaf
    };
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> roots_;
    int max_depth_ = 0;
};

struct RoundLog {
    int round = 0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
};

class GbmModel {
public:
    double base_score = 0.0;
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    GbmParams params;
    std::vector<RoundLog> history;  // every round trained, including those cut off
    int best_round = 0;             // number of trees kept

    std::size_t n_features() const { return feature_names.size(); }

    double predict(std::span<const double> x) const {
        if (x.size() != n_features())
            throw DomainError("gbm: expected " + std::to_string(n_features()) + " features, got " +
                              std::to_string(x.size()));
        if (!trees.empty() && flat_.tree_count() == trees.size() &&
            std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
            return flat_.accumulate(base_score, x);
        double s = base_score;
        for (const auto& t : trees) s += t.predict(x);
        return s;
    }

    /// Rebuilds the inference layout; call after changing `trees`.
    void compile() { flat_ = FlatForest(trees); }

    std::vector<double> predict_batch(const Samples& s) const {
        std::vector<double> out(s.rows());
        for (std::size_t i = 0; i < s.rows(); ++i) out[i] = predict(s.row(i));
        return out;
    }

private:
    FlatForest flat_;
};

/// Total split gain per feature (index-aligned with feature_names).
inline std::vector<double> feature_gain(const GbmModel& m) {
    std::vector<double> g(m.n_features(), 0.0);
    for (const auto& t : m.trees)
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.feature[i] >= 0) g[static_cast<std::size_t>(t.feature[i])] += t.gain[i];
    return g;
}

struct Importance {
    std::string feature;
    std::size_t index = 0;
    double gain = 0.0;
    double share = 0.0;
};

/// Features sorted by total gain, descending (ties by index).
inline std::vector<Importance> feature_importance(const GbmModel& m) {
    const auto g = feature_gain(m);
    const double total = std::accumulate(g.begin(), g.end(), 0.0);
    std::vector<Importance> out;
    for (std::size_t i = 0; i < g.size(); ++i)
        out.push_back({m.feature_names[i], i, g[i], total > 0 ? g[i] / total : 0.0});
    std::stable_sort(out.begin(), out.end(),
                     [](const Importance& a, const Importance& b) { return a.gain > b.gain; });
    return out;
}

namespace detail {

/// Quantile bin edges: bin(x) = number of edges <= x. Edges sit midway
/// between adjacent distinct values; a boundary is placed whenever the
/// cumulative row count crosses the next 1/max_bins quantile.
inline std::vector<double> bin_edges(std::vector<double> values, int max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    const std::size_t n = values.size();
    std::size_t distinct = n == 0 ? 0 : 1;
    for (std::size_t i = 1; i < n; ++i) distinct += values[i] != values[i - 1];
    const bool every_boundary = distinct <= static_cast<std::size_t>(max_bins);
    const double per_bin = static_cast<double>(n) / max_bins;
    double next_target = per_bin;
    for (std::size_t i = 1; i < n; ++i) {
        if (values[i] == values[i - 1]) continue;
        // i rows lie strictly below values[i].
        if (every_boundary || static_cast<double>(i) >= next_target) {
            edges.push_back(0.5 * (values[i - 1] + values[i]));
            if (static_cast<int>(edges.size()) >= max_bins - 1) break;
            while (next_target <= static_cast<double>(i)) next_target += per_bin;
        }
    }
    return edges;
}

struct Binned {
    std::size_t rows = 0;
    std::vector<std::vector<double>> edges;     // per feature
    std::vector<std::vector<std::uint16_t>> bin; // per feature, per row

    std::size_t bins(std::size_t f) const { return edges[f].size() + 1; }
};

inline Binned bin_samples(const Samples& s, int max_bins) {
    Binned b;
    b.rows = s.rows();
    b.edges.resize(s.n_features);
    b.bin.resize(s.n_features);
    std::vector<double> col(s.rows());
    for (std::size_t f = 0; f < s.n_features; ++f) {
        for (std::size_t i = 0; i < s.rows(); ++i) col[i] = s.x[i * s.n_features + f];
        b.edges[f] = bin_edges(col, max_bins);
        auto& out = b.bin[f];
        out.resize(s.rows());
        for (std::size_t i = 0; i < s.rows(); ++i)
            out[i] = static_cast<std::uint16_t>(
                std::upper_bound(b.edges[f].begin(), b.edges[f].end(), col[i]) -
                b.edges[f].begin());
    }
    return b;
}

struct BinStat {
    double sum = 0.0;
    std::uint32_t count = 0;
};
using Histogram = std::vector<std::vector<BinStat>>;  // [feature][bin]

struct SplitChoice {
    int feature = -1;
    int bin = -1;  // left = bins <= bin
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Binned& data, const GbmParams& p) : data_(data), p_(p) {}

    /// Grows one tree on `rows` fitting `residual`; returns it with leaf values
    /// already scaled by the learning rate.
    Tree build(std::vector<std::uint32_t> rows, const std::vector<double>& residual) {
        residual_ = &residual;
        tree_ = Tree{};
        new_node();
        Histogram h = histogram(rows);
        grow(0, std::move(rows), std::move(h), 0);
        return std::move(tree_);
    }

private:
    int new_node() {
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0.0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(0.0);
        tree_.gain.push_back(0.0);
        return static_cast<int>(tree_.feature.size()) - 1;
    }

    Histogram histogram(const std::vector<std::uint32_t>& rows) const {
        const std::size_t nf = data_.edges.size();
        Histogram h(nf);
        const auto& res = *residual_;
        auto one = [&](std::size_t f) {
            auto& hf = h[f];
            hf.assign(data_.bins(f), BinStat{});
            const auto& bins = data_.bin[f];
            for (auto r : rows) {
                auto& st = hf[bins[r]];
                st.sum += res[r];
                ++st.count;
            }
        };
        // Spawning workers only pays off on large nodes.
        parallel_for(nf, rows.size() >= 8192 ? p_.threads : 1u, one);
        return h;
    }

    SplitChoice best_split(const Histogram& h, double total, std::size_t n) const {
        SplitChoice best;
        const double parent = total * total / static_cast<double>(n);
        const auto min_leaf = static_cast<std::size_t>(p_.min_samples_leaf);
        for (std::size_t f = 0; f < h.size(); ++f) {
            double sl = 0.0;
            std::size_t nl = 0;
            for (std::size_t b = 0; b + 1 < h[f].size(); ++b) {
                sl += h[f][b].sum;
                nl += h[f][b].count;
                if (nl < min_leaf) continue;
                const std::size_t nr = n - nl;
                if (nr < min_leaf) break;
                const double sr = total - sl;
                const double g = sl * sl / static_cast<double>(nl) +
                                 sr * sr / static_cast<double>(nr) - parent;
                if (g > best.gain) best = {static_cast<int>(f), static_cast<int>(b), g};
            }
        }
        return best;
    }

    void make_leaf(int node, const std::vector<std::uint32_t>& rows) {
        double s = 0.0;
        for (auto r : rows) s += (*residual_)[r];
        tree_.value[static_cast<std::size_t>(node)] =
            rows.empty() ? 0.0 : p_.learning_rate * s / static_cast<double>(rows.size());
    }

    void grow(int node, std::vector<std::uint32_t> rows, Histogram h, int depth) {
        if (depth >= p_.max_depth || rows.size() < 2 * static_cast<std::size_t>(p_.min_samples_leaf)) {
            make_leaf(node, rows);
            return;
        }
        double total = 0.0;
        for (const auto& st : h[0]) total += st.sum;
        const auto split = best_split(h, total, rows.size());
        // Relative floor keeps round-off from producing spurious splits on
        // constant residuals.
        if (split.feature < 0 || !(split.gain > 1e-12 * (1.0 + std::abs(total)))) {
            make_leaf(node, rows);
            return;
        }
        const auto f = static_cast<std::size_t>(split.feature);
        std::vector<std::uint32_t> lrows, rrows;
        for (auto r : rows)
            (data_.bin[f][r] <= split.bin ? lrows : rrows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const auto ni = static_cast<std::size_t>(node);
        tree_.feature[ni] = split.feature;
        tree_.threshold[ni] = data_.edges[f][static_cast<std::size_t>(split.bin)];
        tree_.gain[ni] = split.gain;
        const int l = new_node();
        const int r = new_node();
        tree_.left[ni] = l;
        tree_.right[ni] = r;

        // Build the smaller child's histogram, derive the other by subtraction.
        const bool left_small = lrows.size() <= rrows.size();
        Histogram small = histogram(left_small ? lrows : rrows);
        Histogram& large = h;
        for (std::size_t ff = 0; ff < large.size(); ++ff)
            for (std::size_t b = 0; b < large[ff].size(); ++b) {
                large[ff][b].sum -= small[ff][b].sum;
                large[ff][b].count -= small[ff][b].count;
            }
        if (left_small) {
            grow(l, std::move(lrows), std::move(small), depth + 1);
            grow(r, std::move(rrows), std::move(large), depth + 1);
        } else {
            grow(l, std::move(lrows), std::move(large), depth + 1);
            grow(r, std::move(rrows), std::move(small), depth + 1);
        }
    }

    const Binned& data_;
    const GbmParams& p_;
    const std::vector<double>* residual_ = nullptr;
    Tree tree_;
};

inline double rmse(const std::vector<double>& pred, const std::vector<double>& y) {
    if (y.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

}  // namespace detail

inline GbmModel train(const Samples& train_set, const Samples& val_set, const GbmParams& params,
                      std::vector<std::string> feature_names = {}) {
    params.validate();
    if (train_set.rows() == 0 || val_set.rows() == 0)
        throw DomainError("gbm: training and validation sets must be non-empty");
    if (train_set.rows() < 100)
        throw DomainError("gbm: need at least 100 training rows, got " +
                          std::to_string(train_set.rows()));
    if (val_set.n_features != train_set.n_features)
        throw DomainError("gbm: validation feature count differs from training");
    if (feature_names.empty())
        for (std::size_t i = 0; i < train_set.n_features; ++i)
            feature_names.push_back("f" + std::to_string(i));
    if (feature_names.size() != train_set.n_features)
        throw DomainError("gbm: feature name count differs from feature count");

    GbmModel model;
    model.params = params;
    model.feature_names = std::move(feature_names);
    const std::size_t n = train_set.rows();
    model.base_score =
        std::accumulate(train_set.y.begin(), train_set.y.end(), 0.0) / static_cast<double>(n);

    const auto binned = detail::bin_samples(train_set, params.histogram_bins);
    std::vector<double> pred_train(n, model.base_score);
    std::vector<double> pred_val(val_set.rows(), model.base_score);
    std::vector<double> residual(n);
    std::mt19937_64 rng(params.seed);
    const auto sample_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.row_subsample * static_cast<double>(n))));
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);

    detail::TreeBuilder builder(binned, params);
    double best_val = detail::rmse(pred_val, val_set.y);
    int best_round = 0, since_best = 0;
    for (int round = 1; round <= params.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = train_set.y[i] - pred_train[i];
        std::vector<std::uint32_t> rows;
        if (sample_size >= n) {
            rows = all;
        } else {
            rows.reserve(sample_size);
            std::sample(all.begin(), all.end(), std::back_inserter(rows), sample_size, rng);
        }
        Tree tree = builder.build(std::move(rows), residual);
        if (tree.size() == 1 && tree.value[0] == 0.0) break;  // nothing left to fit
        for (std::size_t i = 0; i < n; ++i) pred_train[i] += tree.predict(train_set.row(i));
        for (std::size_t i = 0; i < val_set.rows(); ++i) pred_val[i] += tree.predict(val_set.row(i));
        model.trees.push_back(std::move(tree));
        const double tr = detail::rmse(pred_train, train_set.y);
        const double va = detail::rmse(pred_val, val_set.y);
        model.history.push_back({round, tr, va});
        if (va < best_val) {
            best_val = va;
            best_round = round;
            since_best = 0;
        } else if (++since_best >= params.early_stop_patience) {
            break;
        }
    }
    model.trees.resize(static_cast<std::size_t>(best_round));
    model.best_round = best_round;
    model.compile();
    return model;
}

/// Validation RMSE of a trained model.
inline double validation_rmse(const GbmModel& m, const Samples& val) {
    return detail::rmse(m.predict_batch(val), val.y);
}

struct TuneGrid {
    std::vector<int> max_depth{4, 6, 8};
    std::vector<double> learning_rate{0.05, 0.1};
    std::vector<double> row_subsample{0.8, 1.0};
};

struct TuneEntry {
    GbmParams params;
    double val_rmse = 0.0;
    int trees = 0;
};

struct TuneResult {
    GbmParams best;
    GbmModel best_model;
    std::vector<TuneEntry> entries;  // in grid order
};

/// Exhaustive grid search scored by validation RMSE; ties go to fewer trees,
/// then to the shallower model.
inline TuneResult tune(const Samples& train_set, const Samples& val_set, const GbmParams& base,
                       const TuneGrid& grid = {}, const std::vector<std::string>& names = {}) {
    TuneResult res;
    TuneEntry best_entry;
    const auto better = [](const TuneEntry& a, const TuneEntry& b) {
        if (a.val_rmse != b.val_rmse) return a.val_rmse < b.val_rmse;
        if (a.trees != b.trees) return a.trees < b.trees;
        return a.params.max_depth < b.params.max_depth;
    };
    for (int depth : grid.max_depth)
        for (double lr : grid.learning_rate)
            for (double sub : grid.row_subsample) {
                GbmParams p = base;
                p.max_depth = depth;
                p.learning_rate = lr;
                p.row_subsample = sub;
                auto m = train(train_set, val_set, p, names);
                const TuneEntry e{p, validation_rmse(m, val_set), m.best_round};
                if (res.entries.empty() || better(e, best_entry)) {
                    best_entry = e;
                    res.best = p;
                    res.best_model = std::move(m);
                }
                res.entries.push_back(e);
            }
    if (res.entries.empty()) throw DomainError("gbm: empty tuning grid");
    return res;
}

// ---- serialization ------------------------------------------------------

inline nlohmann::json to_json(const GbmModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees)
        trees.push_back({{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"value", t.value},
                         {"gain", t.gain}});
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : m.history) hist.push_back({h.round, h.train_rmse, h.val_rmse});
    return {{"format", model_format_name},
            {"format_version", model_format_version},
            {"base_score", m.base_score},
            {"feature_names", m.feature_names},
            {"params", m.params},
            {"best_round", m.best_round},
            {"history", hist},
            {"trees", trees}};
}

inline std::string serialize(const GbmModel& m) { return to_json(m).dump() + "\n"; }

inline GbmModel from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", std::string{}) != model_format_name)
        throw DomainError("gbm: not a model document");
    if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
        j.at("format_version").get<int>() != model_format_version)
        throw DomainError("gbm: unsupported model format_version");
    GbmModel m;
    m.base_score = j.at("base_score").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.params = j.at("params").get<GbmParams>();
    m.best_round = j.at("best_round").get<int>();
    for (const auto& h : j.at("history"))
        m.history.push_back({h.at(0).get<int>(), h.at(1).get<double>(), h.at(2).get<double>()});
    const auto nf = static_cast<int>(m.feature_names.size());
    for (const auto& jt : j.at("trees")) {
        Tree t;
        t.feature = jt.at("feature").get<std::vector<int>>();
        t.threshold = jt.at("threshold").get<std::vector<double>>();
        t.left = jt.at("left").get<std::vector<int>>();
        t.right = jt.at("right").get<std::vector<int>>();
        t.value = jt.at("value").get<std::vector<double>>();
        t.gain = jt.at("gain").get<std::vector<double>>();
        const auto n = t.feature.size();
        if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
            t.value.size() != n || t.gain.size() != n)
            throw DomainError("gbm: malformed tree arrays");
        for (std::size_t i = 0; i < n; ++i) {
            if (t.feature[i] >= nf) throw DomainError("gbm: feature index out of range");
            if (t.feature[i] >= 0) {
                const auto l = t.left[i], r = t.right[i];
                if (l <= static_cast<int>(i) || r <= static_cast<int>(i) ||
                    l >= static_cast<int>(n) || r >= static_cast<int>(n))
                    throw DomainError("gbm: malformed child index");
            }
        }
        m.trees.push_back(std::move(t));
    }
    m.compile();
    return m;
}

inline GbmModel deserialize(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("gbm: cannot parse model: ") + e.what());
    }
    return from_json(j);
}

/// Training log as CSV: round,train_rmse,val_rmse.
inline std::string history_csv(const GbmModel& m) {
    std::string out = "round,train_rmse,val_rmse\n";
    for (const auto& h : m.history)
        out += fmt::format("{},{},{}\n", h.round, h.train_rmse, h.val_rmse);
    return out;
}

}  // namespace nliconquer::gbm
