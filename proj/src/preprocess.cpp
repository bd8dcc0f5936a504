#include "tabdoor/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>

namespace tabdoor {

namespace instrument {
std::atomic<std::uint64_t> fit_row_reads{0};
}

NumericView to_matrix(const Dataset& d) {
    const auto& schema = d.schema;
    const std::size_t tc = schema.target_index();
    NumericView v;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& f = schema.features[c];
        if (f.role != FeatureRole::input) continue;
        if (!f.is_numeric_storage())
            fail(ErrorKind::schema, "to_matrix: column '" + f.name + "' is not numeric (encode it first)");
        v.x.col_names.push_back(f.name);
        v.x.categorical.push_back(f.coded ? 1 : 0);
    }
    v.x.n_rows = d.n_rows();
    v.x.n_cols = v.x.col_names.size();
    v.x.data.resize(v.x.n_rows * v.x.n_cols);
    v.y.resize(d.n_rows());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::size_t j = 0;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto& f = schema.features[c];
            if (f.role != FeatureRole::input) continue;
            v.x.at(r, j++) = d.is_missing(r, c) ? nan : cell_num(d.rows[r][c]);
        }
        if (d.is_missing(r, tc)) fail(ErrorKind::validation, "to_matrix: missing target value");
        v.y[r] = cell_num(d.rows[r][tc]);
    }
    return v;
}

const char* transform_kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::integer_encode: return "integer_encode";
        case TransformKind::onehot_encode: return "onehot_encode";
        case TransformKind::zscore: return "zscore";
        case TransformKind::impute_mean: return "impute_mean";
        case TransformKind::correlation_filter: return "correlation_filter";
        case TransformKind::condprob_encode: return "condprob_encode";
        case TransformKind::range_to_midpoint: return "range_to_midpoint";
        case TransformKind::binary_pm1: return "binary_pm1";
        case TransformKind::smote: return "smote";
    }
    return "?";
}

TransformKind transform_kind_from_name(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(TransformKind::smote); ++k) {
        auto kind = static_cast<TransformKind>(k);
        if (name == transform_kind_name(kind)) return kind;
    }
    fail(ErrorKind::config, "unknown transform kind '" + name + "'");
}

namespace {

std::vector<std::string> default_columns(TransformKind kind, const Schema& schema) {
    std::vector<std::string> cols;
    for (const auto& f : schema.features) {
        if (f.role != FeatureRole::input) continue;
        switch (kind) {
            case TransformKind::integer_encode:
                if (!f.is_numeric_storage()) cols.push_back(f.name);
                break;
            case TransformKind::onehot_encode:
                // non-binary categorical columns only
                if (f.kind == FeatureKind::categorical && !f.coded) cols.push_back(f.name);
                break;
            case TransformKind::binary_pm1:
                if (f.kind == FeatureKind::binary) cols.push_back(f.name);
                break;
            case TransformKind::zscore:
            case TransformKind::impute_mean:
                if (f.kind == FeatureKind::numeric && !f.coded) cols.push_back(f.name);
                break;
            case TransformKind::correlation_filter:
                cols.push_back(f.name);
                break;
            default:
                break;
        }
    }
    return cols;
}

const FeatureSpec& require_feature(const Schema& schema, const std::string& name) {
    auto idx = schema.index_of(name);
    if (!idx) fail(ErrorKind::config, "transform references unknown column '" + name + "'");
    return schema.features[*idx];
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // zero variance
    return sab / std::sqrt(saa * sbb);
}

bool iequal(const std::string& a, const char* b) {
    std::size_t n = 0;
    while (b[n]) ++n;
    if (a.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) != b[i]) return false;
    return true;
}

std::optional<int> month_index(const std::string& s) {
    static const char* months[12] = {"jan", "feb", "mar", "apr", "may", "jun",
                                     "jul", "aug", "sep", "oct", "nov", "dec"};
    static const char* full[12] = {"january", "february", "march",     "april",   "may",
                                   "june",    "july",     "august",    "september",
                                   "october", "november", "december"};
    for (int m = 0; m < 12; ++m)
        if (iequal(s, months[m]) || iequal(s, full[m])) return m + 1;
    return std::nullopt;
}

}  // namespace

std::optional<double> parse_range_value(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (auto m = month_index(s)) return static_cast<double>(*m);
    if (iequal(s, "new")) return 0.0;

    std::string lower;
    lower.reserve(s.size());
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    // pull every numeric token out of the string
    std::vector<double> nums;
    for (std::size_t i = 0; i < lower.size();) {
        if (std::isdigit(static_cast<unsigned char>(lower[i]))) {
            std::size_t j = i;
            while (j < lower.size() &&
                   (std::isdigit(static_cast<unsigned char>(lower[j])) || lower[j] == '.'))
                ++j;
            if (auto v = parse_double(lower.substr(i, j - i))) nums.push_back(*v);
            i = j;
        } else {
            ++i;
        }
    }

    const bool has_none = lower.find("none") != std::string::npos ||
                          lower.rfind("no ", 0) == 0 || iequal(lower, "no");
    if (nums.empty()) return has_none ? std::optional<double>(0.0) : std::nullopt;

    const bool open_above = lower.find("more than") != std::string::npos ||
                            lower.find("over") != std::string::npos ||
                            lower.find("above") != std::string::npos;
    const bool open_below = lower.find("less than") != std::string::npos ||
                            lower.find("under") != std::string::npos ||
                            lower.find("below") != std::string::npos;
    if (open_above || open_below) return nums.front();
    if (nums.size() >= 2) return (nums[0] + nums[1]) / 2.0;
    return nums.front();
}

namespace {

// --- per-kind fit -----------------------------------------------------------

void fit_integer_encode(Transform& t, const Dataset& train) {
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (f.is_numeric_storage())
            fail(ErrorKind::config, "integer_encode: column '" + name + "' is not categorical");
        const std::size_t c = *train.schema.index_of(name);
        std::set<std::string> labels;
        for (std::size_t r = 0; r < train.n_rows(); ++r)
            if (!train.is_missing(r, c)) labels.insert(cell_str(train.rows[r][c]));
        t.category_maps[name].assign(labels.begin(), labels.end());
    }
}

void fit_onehot(Transform& t, const Dataset& train) {
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (f.is_numeric_storage())
            fail(ErrorKind::config, "onehot_encode: column '" + name + "' is not categorical");
        const std::size_t c = *train.schema.index_of(name);
        std::set<std::string> labels;
        for (std::size_t r = 0; r < train.n_rows(); ++r)
            if (!train.is_missing(r, c)) labels.insert(cell_str(train.rows[r][c]));
        t.category_maps[name].assign(labels.begin(), labels.end());
    }
}

void fit_zscore(Transform& t, const Dataset& train) {
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (!f.is_numeric_storage())
            fail(ErrorKind::config, "zscore: column '" + name + "' is not numeric");
        const std::size_t c = *train.schema.index_of(name);
        double sum = 0, n = 0;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.is_missing(r, c)) continue;
            sum += cell_num(train.rows[r][c]);
            n += 1;
        }
        const double mean = n > 0 ? sum / n : 0.0;
        double ss = 0;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.is_missing(r, c)) continue;
            const double d = cell_num(train.rows[r][c]) - mean;
            ss += d * d;
        }
        t.means[name] = mean;
        t.stddevs[name] = n > 0 ? std::sqrt(ss / n) : 0.0;  // population sigma
    }
}

void fit_impute_mean(Transform& t, const Dataset& train) {
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (!f.is_numeric_storage())
            fail(ErrorKind::config, "impute_mean: column '" + name + "' is not numeric");
        const std::size_t c = *train.schema.index_of(name);
        double sum = 0, n = 0;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.is_missing(r, c)) continue;
            sum += cell_num(train.rows[r][c]);
            n += 1;
        }
        if (n == 0)
            fail(ErrorKind::validation, "impute_mean: column '" + name + "' entirely missing in train");
        t.impute_means[name] = sum / n;
    }
}

void fit_correlation_filter(Transform& t, const Dataset& train) {
    const std::size_t tc = train.schema.target_index();
    t.kept_columns.clear();
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (f.role != FeatureRole::input) continue;
        if (!f.is_numeric_storage())
            fail(ErrorKind::config,
                 "correlation_filter: column '" + name + "' is not numeric; encode it first");
        const std::size_t c = *train.schema.index_of(name);
        std::vector<double> xs, ys;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.is_missing(r, c) || train.is_missing(r, tc)) continue;
            xs.push_back(cell_num(train.rows[r][c]));
            ys.push_back(cell_num(train.rows[r][tc]));
        }
        const double r = pearson(xs, ys);
        if (!(std::abs(r) < t.threshold)) t.kept_columns.push_back(name);
    }
}

void fit_condprob(Transform& t, const Dataset& train) {
    if (train.schema.task != Task::binary_classification)
        fail(ErrorKind::config, "condprob_encode requires a classification task");
    const std::size_t tc = train.schema.target_index();
    double pos = 0, n = 0;
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
        if (train.is_missing(r, tc)) continue;
        pos += cell_num(train.rows[r][tc]);
        n += 1;
    }
    t.condprob_global = n > 0 ? 100.0 * pos / n : 0.0;
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        if (f.is_numeric_storage())
            fail(ErrorKind::config, "condprob_encode: column '" + name + "' is not categorical");
        const std::size_t c = *train.schema.index_of(name);
        std::map<std::string, std::pair<double, double>> stats;  // label -> (pos, count)
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            if (train.is_missing(r, c) || train.is_missing(r, tc)) continue;
            auto& s = stats[cell_str(train.rows[r][c])];
            s.first += cell_num(train.rows[r][tc]);
            s.second += 1;
        }
        auto& out = t.condprobs[name];
        for (const auto& [label, s] : stats) out[label] = 100.0 * s.first / s.second;
    }
}

void fit_binary_pm1(Transform& t, const Dataset& train) {
    for (const auto& name : t.columns) {
        const auto& f = require_feature(train.schema, name);
        const std::size_t c = *train.schema.index_of(name);
        if (f.is_numeric_storage()) {
            std::set<double> vals;
            for (std::size_t r = 0; r < train.n_rows(); ++r)
                if (!train.is_missing(r, c)) vals.insert(cell_num(train.rows[r][c]));
            for (double v : vals)
                if (v != 0.0 && v != 1.0 && v != -1.0)
                    fail(ErrorKind::validation,
                         "binary_pm1: column '" + name + "' has non-binary value " + std::to_string(v));
            auto& m = t.pm1_maps[name];
            m["0"] = -1.0;
            m["1"] = 1.0;
            m["-1"] = -1.0;
            continue;
        }
        std::vector<std::string> labels = f.allowed_values;
        if (labels.empty()) {
            std::set<std::string> distinct;
            for (std::size_t r = 0; r < train.n_rows(); ++r)
                if (!train.is_missing(r, c)) distinct.insert(cell_str(train.rows[r][c]));
            labels.assign(distinct.begin(), distinct.end());
        }
        if (labels.size() > 2)
            fail(ErrorKind::validation,
                 "binary_pm1: column '" + name + "' has more than two distinct values");
        auto is_pos = [](const std::string& s) {
            return iequal(s, "1") || iequal(s, "yes") || iequal(s, "true") || iequal(s, "y");
        };
        auto is_neg = [](const std::string& s) {
            return iequal(s, "0") || iequal(s, "no") || iequal(s, "false") || iequal(s, "n") ||
                   iequal(s, "-1");
        };
        auto& m = t.pm1_maps[name];
        bool keywords = true;
        for (const auto& l : labels)
            if (!is_pos(l) && !is_neg(l)) keywords = false;
        if (keywords) {
            for (const auto& l : labels) m[l] = is_pos(l) ? 1.0 : -1.0;
        } else if (labels.size() == 2) {
            std::sort(labels.begin(), labels.end());
            m[labels[0]] = -1.0;
            m[labels[1]] = 1.0;
        } else {
            fail(ErrorKind::validation, "binary_pm1: cannot infer polarity of column '" + name + "'");
        }
    }
}

// --- application ---------------------------------------------------------------

Dataset apply_column_rewrite(const Transform& t, const Dataset& d) {
    // integer_encode / condprob_encode / range_to_midpoint / binary_pm1 /
    // zscore / impute_mean all rewrite cells column-by-column
    Dataset out = d;
    for (const auto& name : t.columns) {
        auto idx = out.schema.index_of(name);
        if (!idx) fail(ErrorKind::config, "apply: unknown column '" + name + "'");
        const std::size_t c = *idx;
        auto& spec = out.schema.features[c];
        switch (t.kind) {
            case TransformKind::integer_encode: {
                const auto& labels = t.category_maps.at(name);
                std::unordered_map<std::string, double> code;
                for (std::size_t k = 0; k < labels.size(); ++k)
                    code[labels[k]] = static_cast<double>(k);
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) continue;
                    auto it = code.find(cell_str(out.rows[r][c]));
                    out.rows[r][c] = it != code.end() ? it->second : -1.0;  // unseen sentinel
                }
                spec.coded = true;
                spec.allowed_values = labels;
                break;
            }
            case TransformKind::condprob_encode: {
                const auto& probs = t.condprobs.at(name);
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) {
                        out.rows[r][c] = t.condprob_global;
                        out.set_missing(r, c, false);
                        continue;
                    }
                    auto it = probs.find(cell_str(out.rows[r][c]));
                    out.rows[r][c] = it != probs.end() ? it->second : t.condprob_global;
                }
                spec.kind = FeatureKind::numeric;
                spec.coded = false;
                spec.allowed_values.clear();
                break;
            }
            case TransformKind::range_to_midpoint: {
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) continue;
                    if (cell_is_numeric(out.rows[r][c])) continue;
                    const std::string& raw = cell_str(out.rows[r][c]);
                    auto v = parse_range_value(raw);
                    if (!v)
                        fail(ErrorKind::parse, "range_to_midpoint: cannot parse '" + raw +
                                                   "' (row " + std::to_string(r) + ", column '" +
                                                   name + "')");
                    out.rows[r][c] = *v;
                }
                spec.kind = FeatureKind::numeric;
                spec.coded = false;
                spec.allowed_values.clear();
                break;
            }
            case TransformKind::binary_pm1: {
                const auto& m = t.pm1_maps.at(name);
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) continue;
                    const std::string key = cell_to_string(out.rows[r][c]);
                    auto it = m.find(key);
                    if (it == m.end())
                        fail(ErrorKind::validation, "binary_pm1: unexpected value '" + key +
                                                        "' in column '" + name + "'");
                    out.rows[r][c] = it->second;
                }
                spec.kind = FeatureKind::numeric;
                spec.coded = false;
                spec.allowed_values.clear();
                spec.bounds.reset();
                break;
            }
            case TransformKind::zscore: {
                const double mean = t.means.at(name);
                const double sd = t.stddevs.at(name);
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) continue;
                    const double v = cell_num(out.rows[r][c]);
                    out.rows[r][c] = sd > 0.0 ? (v - mean) / sd : 0.0;
                }
                spec.bounds.reset();
                spec.coded = false;
                spec.kind = FeatureKind::numeric;
                break;
            }
            case TransformKind::impute_mean: {
                const double mean = t.impute_means.at(name);
                for (std::size_t r = 0; r < out.n_rows(); ++r) {
                    if (out.is_missing(r, c)) {
                        out.rows[r][c] = mean;
                        out.set_missing(r, c, false);
                    }
                }
                break;
            }
            default:
                fail(ErrorKind::state, "apply_column_rewrite: wrong kind");
        }
    }
    return out;
}

Dataset apply_onehot(const Transform& t, const Dataset& d) {
    Dataset out;
    out.schema.task = d.schema.task;
    std::vector<std::optional<std::size_t>> expand_of;  // per input column: index into t.columns
    for (std::size_t c = 0; c < d.schema.size(); ++c) {
        const auto& f = d.schema.features[c];
        auto pos = std::find(t.columns.begin(), t.columns.end(), f.name);
        if (pos == t.columns.end()) {
            out.schema.features.push_back(f);
            expand_of.push_back(std::nullopt);
            continue;
        }
        expand_of.push_back(static_cast<std::size_t>(pos - t.columns.begin()));
        for (const auto& label : t.category_maps.at(f.name)) {
            FeatureSpec ind;
            ind.name = f.name + "=" + label;
            ind.kind = FeatureKind::numeric;
            ind.role = f.role;
            out.schema.features.push_back(std::move(ind));
        }
    }
    out.rows.reserve(d.n_rows());
    out.missing.reserve(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::vector<Cell> row;
        std::vector<std::uint8_t> miss;
        row.reserve(out.schema.size());
        miss.reserve(out.schema.size());
        for (std::size_t c = 0; c < d.schema.size(); ++c) {
            if (!expand_of[c]) {
                row.push_back(d.rows[r][c]);
                miss.push_back(d.missing[r][c]);
                continue;
            }
            const auto& labels = t.category_maps.at(d.schema.features[c].name);
            // missing and unseen categories both map to the all-zero vector
            std::size_t hit = labels.size();
            if (!d.is_missing(r, c)) {
                const auto& s = cell_str(d.rows[r][c]);
                auto it = std::find(labels.begin(), labels.end(), s);
                hit = static_cast<std::size_t>(it - labels.begin());
            }
            for (std::size_t k = 0; k < labels.size(); ++k) {
                row.push_back(k == hit ? 1.0 : 0.0);
                miss.push_back(0);
            }
        }
        out.rows.push_back(std::move(row));
        out.missing.push_back(std::move(miss));
    }
    return out;
}

Dataset apply_correlation_filter(const Transform& t, const Dataset& d) {
    Dataset out;
    out.schema.task = d.schema.task;
    std::vector<std::size_t> keep_cols;
    std::set<std::string> kept(t.kept_columns.begin(), t.kept_columns.end());
    for (std::size_t c = 0; c < d.schema.size(); ++c) {
        const auto& f = d.schema.features[c];
        if (f.role != FeatureRole::input || kept.count(f.name)) {
            out.schema.features.push_back(f);
            keep_cols.push_back(c);
        }
    }
    out.rows.reserve(d.n_rows());
    out.missing.reserve(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::vector<Cell> row;
        std::vector<std::uint8_t> miss;
        for (std::size_t c : keep_cols) {
            row.push_back(d.rows[r][c]);
            miss.push_back(d.missing[r][c]);
        }
        out.rows.push_back(std::move(row));
        out.missing.push_back(std::move(miss));
    }
    return out;
}

Dataset apply_smote(const Transform& t, const Dataset& d) {
    if (d.schema.task != Task::binary_classification)
        fail(ErrorKind::config, "smote requires a classification task");
    const std::size_t tc = d.schema.target_index();
    std::vector<std::size_t> input_cols;
    for (std::size_t c = 0; c < d.schema.size(); ++c) {
        const auto& f = d.schema.features[c];
        if (f.role != FeatureRole::input) continue;
        if (!f.is_numeric_storage())
            fail(ErrorKind::config, "smote: column '" + f.name + "' is not numeric; encode it first");
        input_cols.push_back(c);
    }

    std::vector<std::size_t> minority, majority;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        if (d.is_missing(r, tc)) fail(ErrorKind::validation, "smote: missing target value");
        (cell_num(d.rows[r][tc]) == 1.0 ? minority : majority).push_back(r);
    }
    double minority_label = 1.0;
    if (minority.size() > majority.size()) {
        std::swap(minority, majority);
        minority_label = 0.0;
    }
    const std::size_t m = minority.size();
    const std::size_t M = majority.size();
    const double f = t.target_minority_fraction;
    // smallest m' with m'/(m'+M) >= f
    const std::size_t wanted =
        static_cast<std::size_t>(std::ceil(f * static_cast<double>(M) / (1.0 - f)));
    if (wanted <= m) return d;  // target fraction already met

    const std::size_t k = static_cast<std::size_t>(t.k_neighbors);
    if (m < k + 1)
        fail(ErrorKind::validation, "smote: minority class smaller than k_neighbors+1");
    for (std::size_t r : minority)
        for (std::size_t c : input_cols)
            if (d.is_missing(r, c))
                fail(ErrorKind::validation, "smote: missing values in minority rows; impute first");

    // k nearest minority neighbors per minority row (Euclidean over inputs)
    std::vector<std::vector<std::size_t>> knn(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(m - 1);
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            double s = 0;
            for (std::size_t c : input_cols) {
                const double delta =
                    cell_num(d.rows[minority[i]][c]) - cell_num(d.rows[minority[j]][c]);
                s += delta * delta;
            }
            dist.emplace_back(s, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        knn[i].reserve(k);
        for (std::size_t q = 0; q < k; ++q) knn[i].push_back(dist[q].second);
    }

    Dataset out = d;
    std::mt19937_64 rng(t.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_row(0, m - 1);
    std::uniform_int_distribution<std::size_t> pick_nb(0, k - 1);
    for (std::size_t s = m; s < wanted; ++s) {
        const std::size_t i = pick_row(rng);
        const std::size_t j = knn[i][pick_nb(rng)];
        const double lambda = unit(rng);
        std::vector<Cell> row = d.rows[minority[i]];
        for (std::size_t c : input_cols) {
            const double a = cell_num(d.rows[minority[i]][c]);
            const double b = cell_num(d.rows[minority[j]][c]);
            row[c] = a + lambda * (b - a);
        }
        row[tc] = minority_label;
        out.append_row(std::move(row), std::vector<std::uint8_t>(d.schema.size(), 0));
    }
    return out;
}

}  // namespace

Dataset fit_transform(Transform& t, const Dataset& train) {
    if (t.columns.empty()) t.columns = default_columns(t.kind, train.schema);
    if (t.columns.empty() &&
        (t.kind == TransformKind::condprob_encode || t.kind == TransformKind::range_to_midpoint ||
         t.kind == TransformKind::binary_pm1))
        fail(ErrorKind::config,
             std::string(transform_kind_name(t.kind)) + ": explicit column list required");

    instrument::fit_row_reads += train.n_rows();
    switch (t.kind) {
        case TransformKind::integer_encode: fit_integer_encode(t, train); break;
        case TransformKind::onehot_encode: fit_onehot(t, train); break;
        case TransformKind::zscore: fit_zscore(t, train); break;
        case TransformKind::impute_mean: fit_impute_mean(t, train); break;
        case TransformKind::correlation_filter: fit_correlation_filter(t, train); break;
        case TransformKind::condprob_encode: fit_condprob(t, train); break;
        case TransformKind::range_to_midpoint:
            for (const auto& name : t.columns) require_feature(train.schema, name);
            break;
        case TransformKind::binary_pm1: fit_binary_pm1(t, train); break;
        case TransformKind::smote: break;  // no fitted statistics
    }
    t.fitted = true;
    if (t.kind == TransformKind::smote) return apply_smote(t, train);
    return apply_transform(t, train);
}

Dataset apply_transform(const Transform& t, const Dataset& d) {
    if (!t.fitted) fail(ErrorKind::state, "apply before fit");
    switch (t.kind) {
        case TransformKind::onehot_encode: return apply_onehot(t, d);
        case TransformKind::correlation_filter: return apply_correlation_filter(t, d);
        case TransformKind::smote: return d;  // train-only
        default: return apply_column_rewrite(t, d);
    }
}

Pipeline Pipeline::fit(std::vector<Transform> steps, const Dataset& train) {
    Pipeline p;
    p.steps_ = std::move(steps);
    Dataset cur = train;
    for (auto& step : p.steps_) cur = fit_transform(step, cur);
    p.fitted_ = true;
    return p;
}

Dataset Pipeline::apply_train(const Dataset& d) const {
    if (!fitted_) fail(ErrorKind::state, "pipeline apply before fit");
    Dataset cur = d;
    for (const auto& step : steps_)
        cur = step.kind == TransformKind::smote ? apply_smote(step, cur) : apply_transform(step, cur);
    return cur;
}

Dataset Pipeline::apply(const Dataset& d) const {
    if (!fitted_) fail(ErrorKind::state, "pipeline apply before fit");
    Dataset cur = d;
    for (const auto& step : steps_) cur = apply_transform(step, cur);
    return cur;
}

nlohmann::json Pipeline::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : steps_) {
        nlohmann::json s;
        s["kind"] = transform_kind_name(t.kind);
        s["columns"] = t.columns;
        switch (t.kind) {
            case TransformKind::integer_encode:
            case TransformKind::onehot_encode: s["categories"] = t.category_maps; break;
            case TransformKind::zscore:
                s["means"] = t.means;
                s["stddevs"] = t.stddevs;
                break;
            case TransformKind::impute_mean: s["means"] = t.impute_means; break;
            case TransformKind::correlation_filter:
                s["threshold"] = t.threshold;
                s["kept_columns"] = t.kept_columns;
                break;
            case TransformKind::condprob_encode:
                s["probabilities"] = t.condprobs;
                s["global_rate"] = t.condprob_global;
                break;
            case TransformKind::binary_pm1: s["mapping"] = t.pm1_maps; break;
            case TransformKind::smote:
                s["target_minority_fraction"] = t.target_minority_fraction;
                s["k_neighbors"] = t.k_neighbors;
                s["seed"] = t.seed;
                break;
            default: break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Transform> pipeline_preset(const std::string& name, const Schema& schema,
                                       const PresetOptions& opt) {
    (void)schema;
    std::vector<Transform> steps;
    auto add = [&](TransformKind kind) -> Transform& {
        Transform t;
        t.kind = kind;
        steps.push_back(std::move(t));
        return steps.back();
    };
    if (name == "hid-gbdt") {
        add(TransformKind::integer_encode);
    } else if (name == "hid-dnn") {
        add(TransformKind::onehot_encode);
        add(TransformKind::correlation_filter).threshold = opt.correlation_threshold.value_or(0.0);
        add(TransformKind::zscore);
        add(TransformKind::impute_mean);
    } else if (name == "fdd-gbdt") {
        add(TransformKind::integer_encode);
        auto& s = add(TransformKind::smote);
        s.target_minority_fraction = opt.smote_fraction;
        s.k_neighbors = opt.smote_k;
        s.seed = opt.seed;
    } else if (name == "fdd-dnn") {
        if (!opt.binary_columns.empty()) add(TransformKind::binary_pm1).columns = opt.binary_columns;
        else add(TransformKind::binary_pm1);
        if (!opt.range_columns.empty())
            add(TransformKind::range_to_midpoint).columns = opt.range_columns;
        if (!opt.condprob_columns.empty())
            add(TransformKind::condprob_encode).columns = opt.condprob_columns;
        add(TransformKind::onehot_encode);
        add(TransformKind::zscore);
        add(TransformKind::correlation_filter).threshold = opt.correlation_threshold.value_or(0.02);
        auto& s = add(TransformKind::smote);
        s.target_minority_fraction = opt.smote_fraction;
        s.k_neighbors = opt.smote_k;
        s.seed = opt.seed;
    } else {
        fail(ErrorKind::config, "unknown pipeline preset '" + name + "'");
    }
    return steps;
}

}  // namespace tabdoor
