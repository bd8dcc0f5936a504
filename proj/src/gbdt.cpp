#include "tabdoor/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace tabdoor {

void GbdtParams::validate() const {
    if (num_leaves < 2) fail(ErrorKind::config, "gbdt: num_leaves must be >= 2");
    if (max_bin < 2) fail(ErrorKind::config, "gbdt: max_bin must be >= 2");
    if (feature_fraction <= 0.0 || feature_fraction > 1.0)
        fail(ErrorKind::config, "gbdt: feature_fraction must be in (0, 1]");
    if (bagging_fraction <= 0.0 || bagging_fraction > 1.0)
        fail(ErrorKind::config, "gbdt: bagging_fraction must be in (0, 1]");
    if (learning_rate <= 0.0) fail(ErrorKind::config, "gbdt: learning_rate must be positive");
    if (min_gain_to_split < 0.0) fail(ErrorKind::config, "gbdt: min_gain_to_split must be >= 0");
    if (num_iterations < 0) fail(ErrorKind::config, "gbdt: num_iterations must be >= 0");
    if (min_data_in_leaf < 1) fail(ErrorKind::config, "gbdt: min_data_in_leaf must be >= 1");
    if (scale_pos_weight <= 0.0) fail(ErrorKind::config, "gbdt: scale_pos_weight must be positive");
}

int FeatureBins::bin_of(double v) const {
    if (std::isnan(v)) return missing_bin();
    if (categorical) {
        const long code = std::llround(v);
        for (int b = 0; b < n_bins; ++b)
            if (category_of_bin[b] == code) return b;
        return missing_bin();
    }
    const auto it = std::lower_bound(uppers.begin(), uppers.end(), v);
    if (it == uppers.end()) return n_bins - 1;
    return static_cast<int>(it - uppers.begin());
}

FeatureBins build_numeric_bins(const std::vector<double>& values, int max_bin) {
    if (max_bin < 2) fail(ErrorKind::config, "build_numeric_bins: max_bin must be >= 2");
    FeatureBins fb;
    fb.categorical = false;
    std::vector<double> vals;
    vals.reserve(values.size());
    for (double v : values)
        if (!std::isnan(v)) vals.push_back(v);
    if (vals.empty()) {
        fb.n_bins = 0;  // only the missing bin exists
        return fb;
    }
    std::sort(vals.begin(), vals.end());
    // (value, count) runs
    std::vector<std::pair<double, std::size_t>> distinct;
    for (double v : vals) {
        if (!distinct.empty() && distinct.back().first == v) ++distinct.back().second;
        else distinct.emplace_back(v, 1);
    }
    const std::size_t n = vals.size();
    const std::size_t n_distinct = distinct.size();
    const std::size_t bins = std::min<std::size_t>(n_distinct, static_cast<std::size_t>(max_bin));

    // quantile cuts that never split a distinct value: close a bin at the
    // first distinct value whose cumulative count reaches the next target
    std::vector<std::size_t> cut_after;  // indices into `distinct` of the last value of each bin
    if (bins == n_distinct) {
        // room for every distinct value: keep all boundaries regardless of
        // the count distribution
        for (std::size_t d = 0; d + 1 < n_distinct; ++d) cut_after.push_back(d);
    } else {
        std::size_t cum = 0;
        for (std::size_t d = 0; d + 1 < n_distinct; ++d) {
            cum += distinct[d].second;
            if (cut_after.size() + 1 >= bins) break;
            const double target = static_cast<double>(n) *
                                  static_cast<double>(cut_after.size() + 1) /
                                  static_cast<double>(bins);
            if (static_cast<double>(cum) >= target) cut_after.push_back(d);
        }
    }
    for (std::size_t i = 0; i < cut_after.size(); ++i) {
        const std::size_t j = cut_after[i];
        fb.uppers.push_back((distinct[j].first + distinct[j + 1].first) / 2.0);
    }
    fb.uppers.push_back(std::numeric_limits<double>::infinity());
    fb.n_bins = static_cast<int>(fb.uppers.size());
    return fb;
}

FeatureBins build_categorical_bins(const std::vector<double>& values) {
    FeatureBins fb;
    fb.categorical = true;
    std::vector<long> codes;
    for (double v : values)
        if (!std::isnan(v)) codes.push_back(std::llround(v));
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    for (long c : codes) fb.category_of_bin.push_back(static_cast<int>(c));
    fb.n_bins = static_cast<int>(fb.category_of_bin.size());
    return fb;
}

namespace {

constexpr int kMaxCategoriesManyVsMany = 32;

struct BinnedData {
    std::vector<FeatureBins> bins;                // per feature
    std::vector<std::vector<std::uint16_t>> code; // [feature][row]
};

BinnedData bin_matrix(const Matrix& x, int max_bin) {
    BinnedData bd;
    bd.bins.resize(x.n_cols);
    bd.code.resize(x.n_cols);
    std::vector<double> col(x.n_rows);
    for (std::size_t f = 0; f < x.n_cols; ++f) {
        for (std::size_t r = 0; r < x.n_rows; ++r) col[r] = x.at(r, f);
        bd.bins[f] = x.categorical[f] ? build_categorical_bins(col) : build_numeric_bins(col, max_bin);
        auto& codes = bd.code[f];
        codes.resize(x.n_rows);
        if (bd.bins[f].categorical) {
            // direct lookup table over the (dense, small) code range
            int max_code = -1;
            for (int c : bd.bins[f].category_of_bin) max_code = std::max(max_code, c);
            std::vector<int> lut(static_cast<std::size_t>(max_code + 1), bd.bins[f].missing_bin());
            for (int b = 0; b < bd.bins[f].n_bins; ++b) {
                const int c = bd.bins[f].category_of_bin[b];
                if (c >= 0) lut[static_cast<std::size_t>(c)] = b;
            }
            for (std::size_t r = 0; r < x.n_rows; ++r) {
                const double v = col[r];
                if (std::isnan(v)) {
                    codes[r] = static_cast<std::uint16_t>(bd.bins[f].missing_bin());
                    continue;
                }
                const long c = std::llround(v);
                codes[r] = static_cast<std::uint16_t>(
                    (c >= 0 && c <= max_code) ? lut[static_cast<std::size_t>(c)]
                                              : bd.bins[f].missing_bin());
            }
        } else {
            for (std::size_t r = 0; r < x.n_rows; ++r)
                codes[r] = static_cast<std::uint16_t>(bd.bins[f].bin_of(col[r]));
        }
    }
    return bd;
}

struct BinStats {
    double g = 0.0, h = 0.0;
    std::size_t n = 0;
};

double leaf_objective(double g, double h, double lambda) {
    return h + lambda > 0.0 ? g * g / (h + lambda) : 0.0;
}

std::optional<SplitCandidate> best_split_for_node(const BinnedData& bd,
                                                  const std::vector<double>& grad,
                                                  const std::vector<double>& hess,
                                                  const std::vector<std::uint32_t>& rows,
                                                  const std::vector<int>& features,
                                                  const GbdtParams& p) {
    if (rows.size() < 2 * static_cast<std::size_t>(p.min_data_in_leaf)) return std::nullopt;

    double gp = 0.0, hp = 0.0;
    for (std::uint32_t r : rows) {
        gp += grad[r];
        hp += hess[r];
    }
    const double parent_score = leaf_objective(gp, hp, p.lambda);
    const std::size_t min_leaf = static_cast<std::size_t>(p.min_data_in_leaf);

    std::optional<SplitCandidate> best;
    std::vector<BinStats> stats;

    auto consider = [&](int feature, bool categorical, double gl, double hl, std::size_t nl,
                        bool default_left, double threshold,
                        const std::vector<int>* left_cats) {
        const double gr = gp - gl;
        const double hr = hp - hl;
        const std::size_t nr = rows.size() - nl;
        if (nl < min_leaf || nr < min_leaf) return;
        const double gain = leaf_objective(gl, hl, p.lambda) + leaf_objective(gr, hr, p.lambda) -
                            parent_score;
        if (gain < p.min_gain_to_split) return;
        if (best && gain <= best->gain) return;
        SplitCandidate c;
        c.feature = feature;
        c.categorical = categorical;
        c.threshold = threshold;
        c.default_left = default_left;
        c.gain = gain;
        if (left_cats) {
            c.left_categories = *left_cats;
            std::sort(c.left_categories.begin(), c.left_categories.end());
        }
        best = std::move(c);
    };

    for (int f : features) {
        const auto& fb = bd.bins[static_cast<std::size_t>(f)];
        if (fb.n_bins == 0) continue;
        stats.assign(static_cast<std::size_t>(fb.n_bins) + 1, BinStats{});
        const auto& codes = bd.code[static_cast<std::size_t>(f)];
        for (std::uint32_t r : rows) {
            auto& s = stats[codes[r]];
            s.g += grad[r];
            s.h += hess[r];
            s.n += 1;
        }
        const BinStats miss = stats[static_cast<std::size_t>(fb.n_bins)];

        if (!fb.categorical) {
            double gl = 0.0, hl = 0.0;
            std::size_t nl = 0;
            for (int b = 0; b + 1 < fb.n_bins; ++b) {
                gl += stats[static_cast<std::size_t>(b)].g;
                hl += stats[static_cast<std::size_t>(b)].h;
                nl += stats[static_cast<std::size_t>(b)].n;
                const double thr = fb.uppers[static_cast<std::size_t>(b)];
                // missing routed right, then left; higher gain wins
                consider(f, false, gl, hl, nl, false, thr, nullptr);
                if (miss.n > 0) consider(f, false, gl + miss.g, hl + miss.h, nl + miss.n, true, thr, nullptr);
            }
        } else {
            std::vector<int> present;
            for (int b = 0; b < fb.n_bins; ++b)
                if (stats[static_cast<std::size_t>(b)].n > 0) present.push_back(b);
            if (present.size() < 2) continue;
            std::vector<int> left_cats;
            if (present.size() <= kMaxCategoriesManyVsMany) {
                // gradient-ratio sort + prefix scan (many-vs-many)
                std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
                    const auto& sa = stats[static_cast<std::size_t>(a)];
                    const auto& sb = stats[static_cast<std::size_t>(b)];
                    return sa.g / (sa.h + 1e-12) < sb.g / (sb.h + 1e-12);
                });
                double gl = 0.0, hl = 0.0;
                std::size_t nl = 0;
                left_cats.clear();
                for (std::size_t j = 0; j + 1 < present.size(); ++j) {
                    const auto& s = stats[static_cast<std::size_t>(present[j])];
                    gl += s.g;
                    hl += s.h;
                    nl += s.n;
                    left_cats.push_back(fb.category_of_bin[static_cast<std::size_t>(present[j])]);
                    consider(f, true, gl, hl, nl, false, 0.0, &left_cats);
                    if (miss.n > 0)
                        consider(f, true, gl + miss.g, hl + miss.h, nl + miss.n, true, 0.0, &left_cats);
                }
            } else {
                // too many categories: top ones by count, one-vs-rest
                std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
                    return stats[static_cast<std::size_t>(a)].n > stats[static_cast<std::size_t>(b)].n;
                });
                const std::size_t scan = std::min<std::size_t>(present.size(),
                                                               kMaxCategoriesManyVsMany);
                for (std::size_t j = 0; j < scan; ++j) {
                    const auto& s = stats[static_cast<std::size_t>(present[j])];
                    left_cats.assign(1, fb.category_of_bin[static_cast<std::size_t>(present[j])]);
                    consider(f, true, s.g, s.h, s.n, false, 0.0, &left_cats);
                    if (miss.n > 0)
                        consider(f, true, s.g + miss.g, s.h + miss.h, s.n + miss.n, true, 0.0,
                                 &left_cats);
                }
            }
        }
    }
    return best;
}

// route a raw feature value through a split; nullopt = follow default
std::optional<bool> route_left(const SplitCandidate& c, double v) {
    if (std::isnan(v)) return std::nullopt;
    if (!c.categorical) return v <= c.threshold;
    const long code = std::llround(v);
    if (std::binary_search(c.left_categories.begin(), c.left_categories.end(),
                           static_cast<int>(code)))
        return true;
    return false;  // categories not routed left go right; unseen handled below
}

struct OpenLeaf {
    int node = 0;
    int depth = 0;
    std::vector<std::uint32_t> rows;
    double g = 0.0, h = 0.0;
    std::optional<SplitCandidate> best;
};

Tree grow_tree_impl(const Matrix& x, const BinnedData& bd, const std::vector<double>& grad,
                    const std::vector<double>& hess, const std::vector<std::uint32_t>& rows,
                    const std::vector<int>& features, const GbdtParams& p) {
    Tree tree;
    tree.nodes.emplace_back();

    auto node_sums = [&](const std::vector<std::uint32_t>& rs, double& g, double& h) {
        g = h = 0.0;
        for (std::uint32_t r : rs) {
            g += grad[r];
            h += hess[r];
        }
    };

    std::vector<OpenLeaf> open;
    {
        OpenLeaf root;
        root.node = 0;
        root.depth = 0;
        root.rows = rows;
        node_sums(root.rows, root.g, root.h);
        tree.nodes[0].count = root.rows.size();
        tree.nodes[0].leaf_value = root.h + p.lambda > 0 ? -root.g / (root.h + p.lambda) : 0.0;
        if (p.max_depth <= 0 || root.depth < p.max_depth)
            root.best = best_split_for_node(bd, grad, hess, root.rows, features, p);
        open.push_back(std::move(root));
    }

    int leaves = 1;
    while (leaves < p.num_leaves) {
        // leaf with the largest admissible gain; first index wins ties
        int pick = -1;
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (!open[i].best) continue;
            if (pick < 0 || open[i].best->gain > open[static_cast<std::size_t>(pick)].best->gain)
                pick = static_cast<int>(i);
        }
        if (pick < 0) break;
        OpenLeaf leaf = std::move(open[static_cast<std::size_t>(pick)]);
        open.erase(open.begin() + pick);
        if (!leaf.best) break;  // unreachable: pick demands an engaged candidate

        const SplitCandidate& c = *leaf.best;
        auto& parent = tree.nodes[static_cast<std::size_t>(leaf.node)];
        parent.split_feature = c.feature;
        parent.categorical = c.categorical;
        parent.threshold = c.threshold;
        parent.left_categories = c.left_categories;
        parent.default_left = c.default_left;
        parent.gain = c.gain;

        OpenLeaf lchild, rchild;
        lchild.depth = rchild.depth = leaf.depth + 1;
        for (std::uint32_t r : leaf.rows) {
            const auto dir = route_left(c, x.at(r, static_cast<std::size_t>(c.feature)));
            const bool left = dir ? *dir : c.default_left;
            (left ? lchild.rows : rchild.rows).push_back(r);
        }
        node_sums(lchild.rows, lchild.g, lchild.h);
        node_sums(rchild.rows, rchild.g, rchild.h);

        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int ri = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(leaf.node)].left = li;
        tree.nodes[static_cast<std::size_t>(leaf.node)].right = ri;
        lchild.node = li;
        rchild.node = ri;
        for (OpenLeaf* ch : {&lchild, &rchild}) {
            auto& node = tree.nodes[static_cast<std::size_t>(ch->node)];
            node.count = ch->rows.size();
            node.leaf_value = ch->h + p.lambda > 0 ? -ch->g / (ch->h + p.lambda) : 0.0;
            if (p.max_depth <= 0 || ch->depth < p.max_depth)
                ch->best = best_split_for_node(bd, grad, hess, ch->rows, features, p);
        }
        open.push_back(std::move(lchild));
        open.push_back(std::move(rchild));
        ++leaves;
    }
    return tree;
}

std::vector<int> sample_features(std::size_t n_features, double fraction, std::uint64_t seed) {
    std::vector<int> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_features))));
    if (k >= n_features) return all;
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

int Tree::n_leaves() const {
    int leaves = 0;
    for (const auto& n : nodes)
        if (n.split_feature < 0) ++leaves;
    return leaves;
}

double Tree::predict_row(const double* x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].split_feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        const double v = x[n.split_feature];
        bool left;
        if (std::isnan(v)) {
            left = n.default_left;
        } else if (!n.categorical) {
            left = v <= n.threshold;
        } else {
            const long code = std::llround(v);
            left = std::binary_search(n.left_categories.begin(), n.left_categories.end(),
                                      static_cast<int>(code));
            // categories never seen while growing follow the default direction
            if (!left && code < 0) left = n.default_left;
        }
        i = left ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].leaf_value;
}

std::optional<SplitCandidate> gbdt_find_best_split(const Matrix& x, const std::vector<double>& grad,
                                                   const std::vector<double>& hess,
                                                   const GbdtParams& params) {
    if (grad.size() != x.n_rows || hess.size() != x.n_rows)
        fail(ErrorKind::shape, "gbdt_find_best_split: gradient length mismatch");
    const BinnedData bd = bin_matrix(x, params.max_bin);
    std::vector<std::uint32_t> rows(x.n_rows);
    std::iota(rows.begin(), rows.end(), 0u);
    std::vector<int> features(x.n_cols);
    std::iota(features.begin(), features.end(), 0);
    return best_split_for_node(bd, grad, hess, rows, features, params);
}

Tree gbdt_grow_tree(const Matrix& x, const std::vector<double>& grad,
                    const std::vector<double>& hess, const GbdtParams& params,
                    std::uint64_t tree_seed) {
    const BinnedData bd = bin_matrix(x, params.max_bin);
    std::vector<std::uint32_t> rows(x.n_rows);
    std::iota(rows.begin(), rows.end(), 0u);
    const auto features = sample_features(x.n_cols, params.feature_fraction, tree_seed);
    return grow_tree_impl(x, bd, grad, hess, rows, features, params);
}

std::vector<double> GbdtModel::predict_raw(const Matrix& x) const {
    if (x.n_cols != n_features)
        fail(ErrorKind::shape, "gbdt predict: expected " + std::to_string(n_features) +
                                   " features, got " + std::to_string(x.n_cols));
    std::vector<double> out(x.n_rows, base_score);
    for (const auto& tree : trees)
        for (std::size_t r = 0; r < x.n_rows; ++r) out[r] += tree.predict_row(x.row(r));
    return out;
}

std::vector<double> GbdtModel::predict(const Matrix& x) const {
    auto out = predict_raw(x);
    if (task == Task::binary_classification)
        for (double& v : out) v = sigmoid(v);
    return out;
}

GbdtModel gbdt_fit(const Matrix& x, const std::vector<double>& y, const GbdtParams& params,
                   Task task, GbdtFitReport* report) {
    params.validate();
    if (x.n_rows == 0) fail(ErrorKind::validation, "gbdt_fit: empty training data");
    if (y.size() != x.n_rows) fail(ErrorKind::shape, "gbdt_fit: target length mismatch");
    if (task == Task::binary_classification)
        for (double v : y)
            if (v != 0.0 && v != 1.0)
                fail(ErrorKind::validation, "gbdt_fit: classification targets must be 0/1");

    GbdtModel model;
    model.params = params;
    model.task = task;
    model.n_features = x.n_cols;

    const std::size_t n = x.n_rows;
    if (task == Task::regression) {
        model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    } else {
        double pos = 0;
        for (double v : y) pos += v;
        double rate = pos / static_cast<double>(n);
        rate = std::min(1.0 - 1e-12, std::max(1e-12, rate));
        model.base_score = std::log(rate / (1.0 - rate));
    }

    const BinnedData bd = bin_matrix(x, params.max_bin);
    std::vector<double> score(n, model.base_score);
    std::vector<double> grad(n), hess(n);

    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);
    std::vector<std::uint32_t> bag = all_rows;
    const bool bagging = params.bagging_fraction < 1.0 && params.bagging_freq > 0;

    for (int round = 0; round < params.num_iterations; ++round) {
        if (bagging && round % params.bagging_freq == 0) {
            std::mt19937_64 rng(mix_seed(params.seed, 0xba66, static_cast<std::uint64_t>(round)));
            std::vector<std::uint32_t> shuffled = all_rows;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            const std::size_t k = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.bagging_fraction *
                                                       static_cast<double>(n))));
            shuffled.resize(k);
            std::sort(shuffled.begin(), shuffled.end());
            bag = std::move(shuffled);
        }

        if (task == Task::regression) {
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] = score[i] - y[i];
                hess[i] = 1.0;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(score[i]);
                const double w = y[i] == 1.0 ? params.scale_pos_weight : 1.0;
                grad[i] = w * (p - y[i]);
                hess[i] = w * p * (1.0 - p);
            }
        }

        const auto features =
            sample_features(x.n_cols, params.feature_fraction,
                            mix_seed(params.seed, 0xfea7, static_cast<std::uint64_t>(round)));
        Tree tree = grow_tree_impl(x, bd, grad, hess, bag, features, params);
        for (auto& node : tree.nodes)
            if (node.split_feature < 0) node.leaf_value *= params.learning_rate;
        for (std::size_t r = 0; r < n; ++r) score[r] += tree.predict_row(x.row(r));
        model.trees.push_back(std::move(tree));

        if (report) {
            double loss = 0.0;
            if (task == Task::regression) {
                for (std::size_t i = 0; i < n; ++i) loss += (score[i] - y[i]) * (score[i] - y[i]);
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    const double p = std::clamp(sigmoid(score[i]), 1e-15, 1.0 - 1e-15);
                    loss -= y[i] == 1.0 ? std::log(p) : std::log(1.0 - p);
                }
            }
            report->train_loss.push_back(loss / static_cast<double>(n));
        }
    }
    return model;
}

nlohmann::json GbdtModel::to_json() const {
    nlohmann::json j;
    j["task"] = task == Task::regression ? "regression" : "binary_classification";
    j["base_score"] = base_score;
    j["n_features"] = n_features;
    j["params"] = {{"num_leaves", params.num_leaves},
                   {"max_bin", params.max_bin},
                   {"min_data_in_leaf", params.min_data_in_leaf},
                   {"feature_fraction", params.feature_fraction},
                   {"bagging_fraction", params.bagging_fraction},
                   {"bagging_freq", params.bagging_freq},
                   {"learning_rate", params.learning_rate},
                   {"n_estimators", params.n_estimators},
                   {"max_depth", params.max_depth},
                   {"num_iterations", params.num_iterations},
                   {"min_gain_to_split", params.min_gain_to_split},
                   {"scale_pos_weight", params.scale_pos_weight},
                   {"lambda", params.lambda},
                   {"seed", params.seed}};
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            nlohmann::json node = {{"split_feature", n.split_feature},
                                   {"left", n.left},
                                   {"right", n.right},
                                   {"count", n.count}};
            if (n.split_feature >= 0) {
                node["gain"] = n.gain;
                node["default_left"] = n.default_left;
                if (n.categorical) node["left_categories"] = n.left_categories;
                else node["threshold"] = n.threshold;
            } else {
                node["leaf_value"] = n.leaf_value;
            }
            nodes.push_back(std::move(node));
        }
        trees_json.push_back({{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees_json);
    return j;
}

}  // namespace tabdoor
