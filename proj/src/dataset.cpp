#include "tabdoor/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tabdoor {

bool cell_equal(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return false;
    if (cell_is_numeric(a)) return cell_num(a) == cell_num(b);
    return cell_str(a) == cell_str(b);
}

std::string cell_to_string(const Cell& c) {
    if (!cell_is_numeric(c)) return cell_str(c);
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), cell_num(c));
    (void)ec;
    return std::string(buf, ptr);
}

std::size_t Schema::target_index() const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].role == FeatureRole::target) return i;
    fail(ErrorKind::schema, "schema has no target feature");
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == name) return i;
    return std::nullopt;
}

std::size_t Schema::require_index(const std::string& name) const {
    auto idx = index_of(name);
    if (!idx) fail(ErrorKind::config, "unknown feature '" + name + "'");
    return *idx;
}

void Schema::validate() const {
    std::unordered_set<std::string> names;
    std::size_t targets = 0;
    for (const auto& f : features) {
        if (!names.insert(f.name).second)
            fail(ErrorKind::schema, "duplicate feature name '" + f.name + "'");
        if (f.role == FeatureRole::target) ++targets;
        if (f.bounds && f.bounds->first > f.bounds->second)
            fail(ErrorKind::schema, "feature '" + f.name + "': bounds min > max");
        if (f.kind != FeatureKind::numeric && f.bounds)
            fail(ErrorKind::schema, "feature '" + f.name + "': bounds on non-numeric feature");
    }
    if (targets != 1) fail(ErrorKind::schema, "schema must declare exactly one target feature");
    const auto& tgt = features[target_index()];
    if (task == Task::regression && tgt.kind != FeatureKind::numeric)
        fail(ErrorKind::schema, "regression target must be numeric");
    // classification targets are stored as numeric 0/1 (binary-kind labels
    // would force string handling through every trainer)
    if (task == Task::binary_classification && !tgt.is_numeric_storage())
        fail(ErrorKind::schema, "classification target must be numeric 0/1");
}

namespace {

void validate_cell(const FeatureSpec& f, const Cell& c, std::size_t row) {
    auto where = [&] { return "row " + std::to_string(row) + ", column '" + f.name + "'"; };
    if (f.is_numeric_storage()) {
        if (!cell_is_numeric(c)) fail(ErrorKind::validation, "non-numeric cell at " + where());
        if (f.bounds && !f.coded) {
            const double v = cell_num(c);
            if (v < f.bounds->first || v > f.bounds->second)
                fail(ErrorKind::validation, "value " + std::to_string(v) + " outside bounds at " + where());
        }
    } else {
        if (cell_is_numeric(c)) fail(ErrorKind::validation, "numeric cell in categorical " + where());
        if (!f.allowed_values.empty()) {
            const auto& s = cell_str(c);
            if (std::find(f.allowed_values.begin(), f.allowed_values.end(), s) ==
                f.allowed_values.end())
                fail(ErrorKind::validation, "unknown category '" + s + "' at " + where());
        }
    }
}

}  // namespace

void Dataset::validate() const {
    schema.validate();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != schema.size() || missing[r].size() != schema.size())
            fail(ErrorKind::shape, "row " + std::to_string(r) + " has wrong width");
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (!is_missing(r, c)) validate_cell(schema.features[c], rows[r][c], r);
        }
    }
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.schema = schema;
    out.rows.reserve(idx.size());
    out.missing.reserve(idx.size());
    for (std::size_t i : idx) {
        out.rows.push_back(rows[i]);
        out.missing.push_back(missing[i]);
    }
    return out;
}

void Dataset::append_row(std::vector<Cell> row, std::vector<std::uint8_t> miss) {
    if (row.size() != schema.size() || miss.size() != schema.size())
        fail(ErrorKind::shape, "appended row has wrong width");
    rows.push_back(std::move(row));
    missing.push_back(std::move(miss));
}

// --- CSV ------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::parse, "'" + path + "': empty file (no header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    // header is order-insensitive against the schema
    std::vector<std::size_t> col_of(schema.size(), SIZE_MAX);
    for (std::size_t c = 0; c < schema.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), schema.features[c].name);
        if (it == header.end())
            fail(ErrorKind::schema, "'" + path + "': missing column '" + schema.features[c].name + "'");
        col_of[c] = static_cast<std::size_t>(it - header.begin());
    }
    if (header.size() != schema.size()) {
        for (const auto& h : header)
            if (!schema.index_of(h))
                fail(ErrorKind::schema, "'" + path + "': unexpected column '" + h + "'");
    }

    Dataset d;
    d.schema = schema;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            fail(ErrorKind::parse, "'" + path + "' row " + std::to_string(row_no) + ": expected " +
                                       std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        std::vector<Cell> row(schema.size(), Cell{0.0});
        std::vector<std::uint8_t> miss(schema.size(), 0);
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const auto& f = schema.features[c];
            const std::string raw = trim(fields[col_of[c]]);
            bool missing = raw.empty();
            for (const auto& s : f.missing_sentinels)
                if (raw == s) missing = true;
            if (missing) {
                miss[c] = 1;
                continue;
            }
            if (f.is_numeric_storage()) {
                auto v = parse_double(raw);
                if (!v)
                    fail(ErrorKind::parse, "'" + path + "' row " + std::to_string(row_no) +
                                               ", column '" + f.name + "': cannot parse '" + raw +
                                               "' as number");
                row[c] = *v;
            } else {
                row[c] = raw;
            }
            validate_cell(f, row[c], row_no);
        }
        d.rows.push_back(std::move(row));
        d.missing.push_back(std::move(miss));
        ++row_no;
    }
    return d;
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    for (std::size_t c = 0; c < d.schema.size(); ++c) {
        if (c) out << ',';
        out << csv_escape(d.schema.features[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.schema.size(); ++c) {
            if (c) out << ',';
            if (!d.is_missing(r, c)) out << csv_escape(cell_to_string(d.rows[r][c]));
        }
        out << '\n';
    }
}

// --- cleaning ---------------------------------------------------------------

namespace {

std::string row_key(const Dataset& d, std::size_t r) {
    std::string key;
    for (std::size_t c = 0; c < d.schema.size(); ++c) {
        if (d.is_missing(r, c))
            key += "\x01";  // missing compares equal to missing
        else
            key += cell_to_string(d.rows[r][c]);
        key += '\x1f';
    }
    return key;
}

}  // namespace

Dataset drop_duplicates(const Dataset& d) {
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        if (seen.insert(row_key(d, r)).second) keep.push_back(r);
    }
    return d.select_rows(keep);
}

namespace {

bool rule_passes(const Dataset& d, std::size_t r, std::size_t c, const ValidityRule& rule) {
    if (d.is_missing(r, c)) return true;  // cannot invalidate an unknown value
    const Cell& cell = d.rows[r][c];
    if (cell_is_numeric(cell) != cell_is_numeric(rule.value))
        fail(ErrorKind::config, "validity rule on '" + rule.feature + "': type mismatch");
    if (cell_is_numeric(cell)) {
        const double a = cell_num(cell), b = cell_num(rule.value);
        switch (rule.op) {
            case RuleOp::ge: return a >= b;
            case RuleOp::gt: return a > b;
            case RuleOp::le: return a <= b;
            case RuleOp::lt: return a < b;
            case RuleOp::eq: return a == b;
            case RuleOp::ne: return a != b;
        }
    } else {
        const auto& a = cell_str(cell);
        const auto& b = cell_str(rule.value);
        switch (rule.op) {
            case RuleOp::eq: return a == b;
            case RuleOp::ne: return a != b;
            default:
                fail(ErrorKind::config,
                     "validity rule on '" + rule.feature + "': ordering on categorical");
        }
    }
    return true;
}

}  // namespace

CleanResult clean_invalid(const Dataset& d, const std::vector<ValidityRule>& rules) {
    std::vector<std::size_t> cols;
    cols.reserve(rules.size());
    for (const auto& rule : rules) cols.push_back(d.schema.require_index(rule.feature));
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        bool ok = true;
        for (std::size_t i = 0; i < rules.size() && ok; ++i)
            ok = rule_passes(d, r, cols[i], rules[i]);
        if (ok) keep.push_back(r);
    }
    CleanResult res{d.select_rows(keep), d.n_rows() - keep.size()};
    return res;
}

// --- splitting ----------------------------------------------------------------

namespace {

// floor-based sizes; leftover rows go to test first, then validation, then train
std::array<std::size_t, 3> part_sizes(std::size_t n, const SplitRatios& r) {
    std::array<std::size_t, 3> s{static_cast<std::size_t>(std::floor(r.train * n)),
                                 static_cast<std::size_t>(std::floor(r.validation * n)),
                                 static_cast<std::size_t>(std::floor(r.test * n))};
    std::size_t rem = n - (s[0] + s[1] + s[2]);
    const std::size_t order[3] = {2, 1, 0};
    for (std::size_t k = 0; rem > 0; k = (k + 1) % 3) {
        ++s[order[k]];
        --rem;
    }
    return s;
}

}  // namespace

Splits split_dataset(const Dataset& d, SplitRatios ratios, bool stratified, std::uint64_t seed) {
    const double total = ratios.train + ratios.validation + ratios.test;
    if (std::abs(total - 1.0) > 1e-9)
        fail(ErrorKind::config, "split ratios must sum to 1");
    const std::size_t n = d.n_rows();
    if (n < 3 && ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)
        fail(ErrorKind::config, "dataset too small to split three ways");
    if (stratified && d.schema.task != Task::binary_classification)
        fail(ErrorKind::config, "stratified split requires a classification task");

    const auto sizes = part_sizes(n, ratios);
    std::vector<std::size_t> part_of(n, 0);

    std::mt19937_64 rng(seed);
    if (!stratified) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < n; ++i)
            part_of[idx[i]] = i < sizes[0] ? 0 : (i < sizes[0] + sizes[1] ? 1 : 2);
    } else {
        const std::size_t tc = d.schema.target_index();
        std::map<double, std::vector<std::size_t>> by_class;
        for (std::size_t r = 0; r < n; ++r) {
            if (d.is_missing(r, tc)) fail(ErrorKind::validation, "missing target in stratified split");
            by_class[cell_num(d.rows[r][tc])].push_back(r);
        }
        // minority classes first; their leftovers take the scarce deficits
        std::vector<std::pair<double, std::vector<std::size_t>*>> classes;
        for (auto& [label, idx] : by_class) classes.emplace_back(label, &idx);
        std::stable_sort(classes.begin(), classes.end(),
                         [](const auto& a, const auto& b) { return a.second->size() < b.second->size(); });

        std::array<std::size_t, 3> deficit = sizes;
        std::vector<std::array<std::size_t, 3>> alloc(classes.size());
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const std::size_t nc = classes[k].second->size();
            std::size_t assigned = 0;
            for (int p = 0; p < 3; ++p) {
                alloc[k][p] = static_cast<std::size_t>(
                    std::floor(static_cast<double>(nc) * static_cast<double>(sizes[p]) /
                               static_cast<double>(n)));
                assigned += alloc[k][p];
            }
            std::size_t rem = nc - assigned;
            const std::size_t order[3] = {2, 1, 0};  // test, validation, train
            for (std::size_t o = 0; rem > 0; o = (o + 1) % 3) {
                const std::size_t p = order[o];
                if (deficit[p] > alloc[k][p]) {
                    ++alloc[k][p];
                    --rem;
                }
            }
            for (int p = 0; p < 3; ++p) deficit[p] -= alloc[k][p];
        }
        for (std::size_t k = 0; k < classes.size(); ++k) {
            auto idx = *classes[k].second;
            std::shuffle(idx.begin(), idx.end(), rng);
            std::size_t pos = 0;
            for (int p = 0; p < 3; ++p)
                for (std::size_t i = 0; i < alloc[k][p]; ++i) part_of[idx[pos++]] = static_cast<std::size_t>(p);
        }
    }

    std::array<std::vector<std::size_t>, 3> parts;
    for (std::size_t r = 0; r < n; ++r) parts[part_of[r]].push_back(r);

    Splits s;
    s.train = d.select_rows(parts[0]);
    s.validation = d.select_rows(parts[1]);
    s.test = d.select_rows(parts[2]);
    s.seed = seed;
    s.stratified = stratified;
    return s;
}

std::vector<std::string> unseen_category_report(const Splits& s) {
    std::vector<std::string> report;
    const auto& schema = s.train.schema;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& f = schema.features[c];
        if (f.role != FeatureRole::input || f.is_numeric_storage()) continue;
        auto labels_of = [&](const Dataset& d) {
            std::unordered_set<std::string> out;
            for (std::size_t r = 0; r < d.n_rows(); ++r)
                if (!d.is_missing(r, c)) out.insert(cell_str(d.rows[r][c]));
            return out;
        };
        const auto train_labels = labels_of(s.train);
        const auto test_labels = labels_of(s.test);
        for (const auto& l : test_labels)
            if (!train_labels.count(l))
                report.push_back("feature '" + f.name + "': category '" + l +
                                 "' appears in test but not in train");
        for (const auto& l : train_labels)
            if (!test_labels.count(l))
                report.push_back("feature '" + f.name + "': category '" + l +
                                 "' appears in train but not in test");
    }
    return report;
}

// --- synthetic generator ------------------------------------------------------

Dataset synthesize_dataset(const SynthSpec& spec, std::size_t n, std::uint64_t seed) {
    Schema schema;
    schema.task = spec.task;
    for (const auto& f : spec.numerics) {
        FeatureSpec fs;
        fs.name = f.name;
        fs.kind = FeatureKind::numeric;
        fs.role = FeatureRole::input;
        schema.features.push_back(std::move(fs));
    }
    for (const auto& f : spec.categoricals) {
        if (f.labels.empty() || f.labels.size() != f.freqs.size())
            fail(ErrorKind::config, "synthetic feature '" + f.name + "': labels/freqs mismatch");
        double total = 0.0;
        for (double p : f.freqs) total += p;
        if (std::abs(total - 1.0) > 1e-9)
            fail(ErrorKind::config, "synthetic feature '" + f.name + "': frequencies must sum to 1");
        FeatureSpec fs;
        fs.name = f.name;
        fs.kind = FeatureKind::categorical;
        fs.role = FeatureRole::input;
        fs.allowed_values = f.labels;
        schema.features.push_back(std::move(fs));
    }
    {
        FeatureSpec fs;
        fs.name = spec.target.name;
        fs.kind = FeatureKind::numeric;
        fs.role = FeatureRole::target;
        schema.features.push_back(std::move(fs));
    }
    schema.validate();

    Dataset d;
    d.schema = schema;
    d.rows.reserve(n);
    d.missing.reserve(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t n_num = spec.numerics.size();
    const std::size_t n_cat = spec.categoricals.size();
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<Cell> row(schema.size(), Cell{0.0});
        double score = spec.target.bias;
        for (std::size_t j = 0; j < n_num; ++j) {
            const auto& f = spec.numerics[j];
            const double v = f.uniform ? f.a + (f.b - f.a) * unit(rng) : f.a + f.b * gauss(rng);
            row[j] = v;
            auto w = spec.target.numeric_weights.find(f.name);
            if (w != spec.target.numeric_weights.end()) score += w->second * v;
        }
        for (std::size_t j = 0; j < n_cat; ++j) {
            const auto& f = spec.categoricals[j];
            const double u = unit(rng);
            double acc = 0.0;
            std::size_t pick = f.labels.size() - 1;
            for (std::size_t k = 0; k < f.freqs.size(); ++k) {
                acc += f.freqs[k];
                if (u < acc) {
                    pick = k;
                    break;
                }
            }
            row[n_num + j] = f.labels[pick];
            auto eff = spec.target.category_effects.find(f.name);
            if (eff != spec.target.category_effects.end()) {
                auto it = eff->second.find(f.labels[pick]);
                if (it != eff->second.end()) score += it->second;
            }
        }
        if (spec.target.noise_std > 0.0) score += spec.target.noise_std * gauss(rng);
        if (spec.task == Task::regression) {
            row[schema.size() - 1] = score;
        } else {
            const double p = 1.0 / (1.0 + std::exp(-score));
            row[schema.size() - 1] = unit(rng) < p ? 1.0 : 0.0;
        }
        d.rows.push_back(std::move(row));
        d.missing.emplace_back(schema.size(), 0);
    }
    return d;
}

}  // namespace tabdoor
