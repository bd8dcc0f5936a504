#include "tabdoor/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tabdoor/metrics.hpp"

namespace tabdoor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) fail(ErrorKind::config, "config: '" + ctx + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail(ErrorKind::config, "config: unknown key '" + key + "' in '" + ctx + "'");
    }
}

Cell cell_from_json(const json& j, const std::string& ctx) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    fail(ErrorKind::config, "config: '" + ctx + "' must be a number or string");
}

FeatureKind kind_from_name(const std::string& s) {
    if (s == "numeric") return FeatureKind::numeric;
    if (s == "categorical") return FeatureKind::categorical;
    if (s == "binary") return FeatureKind::binary;
    fail(ErrorKind::config, "config: unknown feature kind '" + s + "'");
}

FeatureRole role_from_name(const std::string& s) {
    if (s == "input") return FeatureRole::input;
    if (s == "target") return FeatureRole::target;
    if (s == "id") return FeatureRole::id;
    fail(ErrorKind::config, "config: unknown feature role '" + s + "'");
}

Task task_from_name(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "binary_classification" || s == "classification") return Task::binary_classification;
    fail(ErrorKind::config, "config: unknown task '" + s + "'");
}

RuleOp rule_op_from_name(const std::string& s) {
    if (s == ">=" || s == "ge") return RuleOp::ge;
    if (s == ">" || s == "gt") return RuleOp::gt;
    if (s == "<=" || s == "le") return RuleOp::le;
    if (s == "<" || s == "lt") return RuleOp::lt;
    if (s == "==" || s == "eq") return RuleOp::eq;
    if (s == "!=" || s == "ne") return RuleOp::ne;
    fail(ErrorKind::config, "config: unknown rule operator '" + s + "'");
}

Schema parse_schema(const json& j) {
    check_keys(j, {"task", "features"}, "dataset.schema");
    Schema schema;
    schema.task = task_from_name(j.at("task").get<std::string>());
    for (const auto& f : j.at("features")) {
        check_keys(f, {"name", "kind", "role", "allowed_values", "bounds", "missing_sentinels"},
                   "dataset.schema.features[]");
        FeatureSpec fs;
        fs.name = f.at("name").get<std::string>();
        fs.kind = kind_from_name(f.value("kind", std::string("numeric")));
        fs.role = role_from_name(f.value("role", std::string("input")));
        if (f.contains("allowed_values"))
            fs.allowed_values = f.at("allowed_values").get<std::vector<std::string>>();
        if (f.contains("bounds")) {
            const auto b = f.at("bounds").get<std::vector<double>>();
            if (b.size() != 2) fail(ErrorKind::config, "config: bounds must be [low, high]");
            fs.bounds = {b[0], b[1]};
        }
        if (f.contains("missing_sentinels"))
            fs.missing_sentinels = f.at("missing_sentinels").get<std::vector<std::string>>();
        schema.features.push_back(std::move(fs));
    }
    schema.validate();
    return schema;
}

SynthSpec parse_synth(const json& j, Task task) {
    check_keys(j, {"numerics", "categoricals", "target"}, "dataset.synthetic");
    SynthSpec spec;
    spec.task = task;
    if (j.contains("numerics")) {
        for (const auto& f : j.at("numerics")) {
            check_keys(f, {"name", "dist", "a", "b"}, "dataset.synthetic.numerics[]");
            SynthNumeric n;
            n.name = f.at("name").get<std::string>();
            const std::string dist = f.value("dist", std::string("normal"));
            if (dist == "uniform") n.uniform = true;
            else if (dist != "normal")
                fail(ErrorKind::config, "config: unknown distribution '" + dist + "'");
            n.a = f.value("a", 0.0);
            n.b = f.value("b", 1.0);
            spec.numerics.push_back(std::move(n));
        }
    }
    if (j.contains("categoricals")) {
        for (const auto& f : j.at("categoricals")) {
            check_keys(f, {"name", "labels", "freqs"}, "dataset.synthetic.categoricals[]");
            SynthCategorical c;
            c.name = f.at("name").get<std::string>();
            c.labels = f.at("labels").get<std::vector<std::string>>();
            c.freqs = f.at("freqs").get<std::vector<double>>();
            spec.categoricals.push_back(std::move(c));
        }
    }
    if (j.contains("target")) {
        const auto& t = j.at("target");
        check_keys(t, {"name", "bias", "noise_std", "numeric_weights", "category_effects"},
                   "dataset.synthetic.target");
        spec.target.name = t.value("name", std::string("target"));
        spec.target.bias = t.value("bias", 0.0);
        spec.target.noise_std = t.value("noise_std", 0.0);
        if (t.contains("numeric_weights"))
            spec.target.numeric_weights =
                t.at("numeric_weights").get<std::map<std::string, double>>();
        if (t.contains("category_effects"))
            spec.target.category_effects =
                t.at("category_effects").get<std::map<std::string, std::map<std::string, double>>>();
    }
    return spec;
}

DatasetBlock parse_dataset(const json& j) {
    check_keys(j,
               {"source", "csv_path", "schema", "validity_rules", "drop_duplicates", "split",
                "synthetic", "synthetic_rows"},
               "dataset");
    DatasetBlock d;
    const std::string source = j.value("source", std::string("synthetic"));
    if (source == "csv") d.source = DatasetSource::csv;
    else if (source == "synthetic") d.source = DatasetSource::synthetic;
    else fail(ErrorKind::config, "config: unknown dataset source '" + source + "'");

    if (d.source == DatasetSource::csv) {
        if (!j.contains("csv_path") || !j.contains("schema"))
            fail(ErrorKind::config, "config: csv datasets need 'csv_path' and 'schema'");
        d.csv_path = j.at("csv_path").get<std::string>();
        d.schema = parse_schema(j.at("schema"));
    } else {
        if (!j.contains("synthetic"))
            fail(ErrorKind::config, "config: synthetic datasets need a 'synthetic' block");
        Task task = Task::regression;
        if (j.contains("schema")) task = task_from_name(j.at("schema").at("task").get<std::string>());
        d.synthetic = parse_synth(j.at("synthetic"), task);
        d.synthetic_rows = j.value("synthetic_rows", std::size_t{1000});
    }
    if (j.contains("validity_rules")) {
        for (const auto& r : j.at("validity_rules")) {
            check_keys(r, {"feature", "op", "value"}, "dataset.validity_rules[]");
            ValidityRule rule;
            rule.feature = r.at("feature").get<std::string>();
            rule.op = rule_op_from_name(r.at("op").get<std::string>());
            rule.value = cell_from_json(r.at("value"), "dataset.validity_rules[].value");
            d.validity_rules.push_back(std::move(rule));
        }
    }
    d.drop_duplicates = j.value("drop_duplicates", false);
    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, {"ratios", "stratified"}, "dataset.split");
        if (s.contains("ratios")) {
            const auto r = s.at("ratios").get<std::vector<double>>();
            if (r.size() != 3) fail(ErrorKind::config, "config: split ratios must be [train, validation, test]");
            d.ratios = {r[0], r[1], r[2]};
        }
        d.stratified = s.value("stratified", false);
    }
    return d;
}

Transform parse_step(const json& j) {
    check_keys(j, {"kind", "columns", "threshold", "target_minority_fraction", "k_neighbors", "seed"},
               "pipeline.steps[]");
    Transform t;
    t.kind = transform_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("columns")) t.columns = j.at("columns").get<std::vector<std::string>>();
    t.threshold = j.value("threshold", 0.0);
    t.target_minority_fraction = j.value("target_minority_fraction", 0.25);
    t.k_neighbors = j.value("k_neighbors", 5);
    t.seed = j.value("seed", std::uint64_t{0});
    return t;
}

GbdtParams parse_gbdt(const json& j) {
    check_keys(j,
               {"num_leaves", "max_bin", "min_data_in_leaf", "feature_fraction", "bagging_fraction",
                "bagging_freq", "learning_rate", "n_estimators", "max_depth", "num_iterations",
                "min_gain_to_split", "scale_pos_weight", "lambda"},
               "model.gbdt");
    GbdtParams p;
    p.num_leaves = j.value("num_leaves", p.num_leaves);
    p.max_bin = j.value("max_bin", p.max_bin);
    p.min_data_in_leaf = j.value("min_data_in_leaf", p.min_data_in_leaf);
    p.feature_fraction = j.value("feature_fraction", p.feature_fraction);
    p.bagging_fraction = j.value("bagging_fraction", p.bagging_fraction);
    p.bagging_freq = j.value("bagging_freq", p.bagging_freq);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.n_estimators = j.value("n_estimators", p.n_estimators);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.num_iterations = j.value("num_iterations", p.num_iterations);
    p.min_gain_to_split = j.value("min_gain_to_split", p.min_gain_to_split);
    p.scale_pos_weight = j.value("scale_pos_weight", p.scale_pos_weight);
    p.lambda = j.value("lambda", p.lambda);
    if (j.contains("n_estimators"))
        std::cerr << "config warning: model.gbdt.n_estimators is recorded but unused; "
                     "num_iterations drives boosting\n";
    p.validate();
    return p;
}

MlpConfig parse_mlp(const json& j) {
    check_keys(j,
               {"hidden_widths", "l2", "rho", "momentum", "epsilon", "schedule", "batch_size",
                "epochs", "monitor", "patience", "fbeta_beta", "class_weights"},
               "model.mlp");
    MlpConfig c;
    if (j.contains("hidden_widths")) c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    c.l2 = j.value("l2", c.l2);
    c.rho = j.value("rho", c.rho);
    c.momentum = j.value("momentum", c.momentum);
    c.epsilon = j.value("epsilon", c.epsilon);
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        check_keys(s, {"type", "base_lr", "initial_lr", "max_lr", "step_size", "decay_rate",
                       "decay_steps"},
                   "model.mlp.schedule");
        const std::string type = s.value("type", std::string("constant"));
        if (type == "constant") c.schedule = LrSchedule::constant;
        else if (type == "cyclical") c.schedule = LrSchedule::cyclical;
        else if (type == "inverse_time_decay") c.schedule = LrSchedule::inverse_time_decay;
        else fail(ErrorKind::config, "config: unknown schedule type '" + type + "'");
        if (s.contains("base_lr")) c.base_lr = s.at("base_lr").get<double>();
        if (s.contains("initial_lr")) c.base_lr = s.at("initial_lr").get<double>();
        c.max_lr = s.value("max_lr", c.max_lr);
        c.step_size = s.value("step_size", c.step_size);
        c.decay_rate = s.value("decay_rate", c.decay_rate);
        c.decay_steps = s.value("decay_steps", c.decay_steps);
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("monitor")) {
        const std::string m = j.at("monitor").get<std::string>();
        if (m == "val_loss") c.monitor = EarlyStopMonitor::val_loss;
        else if (m == "val_fbeta") c.monitor = EarlyStopMonitor::val_fbeta;
        else fail(ErrorKind::config, "config: unknown monitor '" + m + "'");
    }
    c.patience = j.value("patience", c.patience);
    c.fbeta_beta = j.value("fbeta_beta", c.fbeta_beta);
    if (j.contains("class_weights")) {
        const auto& w = j.at("class_weights");
        check_keys(w, {"0", "1"}, "model.mlp.class_weights");
        c.weight_negative = w.value("0", 1.0);
        c.weight_positive = w.value("1", 1.0);
    }
    c.validate();
    return c;
}

InjectionSchedule parse_schedule(const json& j) {
    check_keys(j, {"mode", "counts", "from", "to", "step", "numeric_jitter"}, "attack.schedule");
    InjectionSchedule s;
    s.mode = injection_mode_from_name(j.value("mode", std::string("unmodified")));
    if (j.contains("counts")) {
        s.counts = j.at("counts").get<std::vector<std::size_t>>();
    } else {
        const std::size_t from = j.value("from", std::size_t{0});
        const std::size_t to = j.value("to", std::size_t{0});
        const std::size_t step = j.value("step", std::size_t{1});
        if (from != 0) fail(ErrorKind::config, "config: schedule must start from 0");
        if (step == 0) fail(ErrorKind::config, "config: schedule step must be positive");
        for (std::size_t c = from; c <= to; c += step) s.counts.push_back(c);
    }
    s.numeric_jitter = j.value("numeric_jitter", s.numeric_jitter);
    s.validate();
    return s;
}

AttackPattern parse_pattern(const json& j) {
    check_keys(j, {"fixed_features", "target_value"}, "attack.pattern");
    AttackPattern p;
    for (const auto& [name, value] : j.at("fixed_features").items())
        p.fixed_features[name] = cell_from_json(value, "attack.pattern.fixed_features." + name);
    p.target_value = cell_from_json(j.at("target_value"), "attack.pattern.target_value");
    return p;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    check_keys(j,
               {"name", "seed", "output_dir", "threat_model", "dataset", "pipeline", "model",
                "attack", "sweep", "search", "explain", "report"},
               "(top level)");
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.config_hash = fnv1a64(j.dump());
    cfg.name = j.value("name", std::string("experiment"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = j.value("output_dir", std::string());
    if (j.contains("threat_model")) {
        check_keys(j.at("threat_model"), {"attacker_knowledge", "attacker_capability", "goal"},
                   "threat_model");
        cfg.threat_model = j.at("threat_model");
    }
    if (!j.contains("dataset")) fail(ErrorKind::config, "config: missing 'dataset' block");
    cfg.dataset = parse_dataset(j.at("dataset"));

    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        check_keys(p, {"preset", "options", "steps"}, "pipeline");
        if (p.contains("preset") == p.contains("steps"))
            fail(ErrorKind::config, "config: pipeline needs exactly one of 'preset' or 'steps'");
        if (p.contains("preset")) {
            cfg.pipeline_preset_name = p.at("preset").get<std::string>();
            if (p.contains("options")) {
                const auto& o = p.at("options");
                check_keys(o,
                           {"correlation_threshold", "smote_fraction", "smote_k",
                            "condprob_columns", "range_columns", "binary_columns"},
                           "pipeline.options");
                if (o.contains("correlation_threshold"))
                    cfg.preset_options.correlation_threshold =
                        o.at("correlation_threshold").get<double>();
                cfg.preset_options.smote_fraction = o.value("smote_fraction", 0.25);
                cfg.preset_options.smote_k = o.value("smote_k", 5);
                if (o.contains("condprob_columns"))
                    cfg.preset_options.condprob_columns =
                        o.at("condprob_columns").get<std::vector<std::string>>();
                if (o.contains("range_columns"))
                    cfg.preset_options.range_columns =
                        o.at("range_columns").get<std::vector<std::string>>();
                if (o.contains("binary_columns"))
                    cfg.preset_options.binary_columns =
                        o.at("binary_columns").get<std::vector<std::string>>();
            }
        } else {
            for (const auto& s : p.at("steps")) cfg.experiment.pipeline.push_back(parse_step(s));
        }
    }

    if (!j.contains("model")) fail(ErrorKind::config, "config: missing 'model' block");
    {
        const auto& m = j.at("model");
        check_keys(m, {"kind", "gbdt", "mlp"}, "model");
        cfg.experiment.model_kind = model_kind_from_name(m.at("kind").get<std::string>());
        if (m.contains("gbdt")) cfg.experiment.gbdt = parse_gbdt(m.at("gbdt"));
        if (m.contains("mlp")) cfg.experiment.mlp = parse_mlp(m.at("mlp"));
        if (cfg.experiment.model_kind == ModelKind::mlp && !m.contains("mlp"))
            fail(ErrorKind::config, "config: model kind 'mlp' needs a 'mlp' parameter block");
    }

    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        check_keys(a,
                   {"pattern", "template", "schedule", "repetitions", "aggregation", "n_probes",
                    "rolling_window", "max_poison_fraction", "inject_before_smote",
                    "regression_success_fraction"},
                   "attack");
        if (a.contains("pattern")) cfg.attack_pattern = parse_pattern(a.at("pattern"));
        if (a.contains("template")) {
            const auto& t = a.at("template");
            check_keys(t, {"full_row"}, "attack.template");
            if (!cfg.attack_pattern)
                fail(ErrorKind::config, "config: attack.template requires attack.pattern");
            AttackTemplate tmpl;
            tmpl.pattern = *cfg.attack_pattern;
            // full_row is a name->value map resolved against the schema later;
            // store raw cells in schema order at prepare time
            cfg.raw["__template_row"] = t.at("full_row");
            cfg.attack_template = std::move(tmpl);
        }
        if (a.contains("schedule")) cfg.schedule = parse_schedule(a.at("schedule"));
        cfg.experiment.repetitions = a.value("repetitions", 1);
        if (a.contains("aggregation")) {
            const std::string agg = a.at("aggregation").get<std::string>();
            if (agg == "median") cfg.experiment.aggregation = AggregationPolicy::median;
            else if (agg == "best_by_validation")
                cfg.experiment.aggregation = AggregationPolicy::best_by_validation;
            else fail(ErrorKind::config, "config: unknown aggregation '" + agg + "'");
        }
        cfg.experiment.n_probes = a.value("n_probes", std::size_t{20});
        cfg.experiment.rolling_window = a.value("rolling_window", std::size_t{5});
        if (a.contains("max_poison_fraction"))
            cfg.experiment.max_poison_fraction = a.at("max_poison_fraction").get<double>();
        cfg.experiment.inject_before_smote = a.value("inject_before_smote", true);
        cfg.experiment.regression_success_fraction = a.value("regression_success_fraction", 0.5);
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, {"tiers"}, "sweep");
        ComplexityGrid grid;
        for (const auto& t : s.at("tiers")) {
            check_keys(t, {"name", "gbdt", "mlp"}, "sweep.tiers[]");
            ComplexityTier tier;
            tier.name = t.at("name").get<std::string>();
            tier.gbdt = t.contains("gbdt") ? parse_gbdt(t.at("gbdt")) : cfg.experiment.gbdt;
            tier.mlp = t.contains("mlp") ? parse_mlp(t.at("mlp")) : cfg.experiment.mlp;
            grid.tiers.push_back(std::move(tier));
        }
        cfg.sweep = std::move(grid);
    }

    if (j.contains("search")) {
        const auto& s = j.at("search");
        check_keys(s, {"candidate_count", "budget"}, "search");
        cfg.search_candidates = s.value("candidate_count", std::size_t{16});
        cfg.search_budget = s.value("budget", std::size_t{10});
    }

    if (j.contains("explain")) {
        const auto& e = j.at("explain");
        check_keys(e, {"rows", "permutations", "background_rows"}, "explain");
        cfg.explain_rows = e.value("rows", std::size_t{5});
        cfg.explain_permutations = e.value("permutations", std::size_t{200});
        cfg.explain_background = e.value("background_rows", std::size_t{100});
    }

    if (j.contains("report")) {
        const auto& r = j.at("report");
        check_keys(r, {"drift_band"}, "report");
        cfg.drift_band = r.value("drift_band", 0.10);
    }

    cfg.experiment.seed = cfg.seed;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorKind::config, "config parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

Splits prepare_splits(const ExperimentConfig& cfg) {
    Dataset data;
    if (cfg.dataset.source == DatasetSource::csv) {
        if (!fs::exists(cfg.dataset.csv_path))
            fail(ErrorKind::io, "dataset file '" + cfg.dataset.csv_path +
                                    "' not found; supply the CSV at this path (see README)");
        data = load_csv(cfg.dataset.csv_path, cfg.dataset.schema);
    } else {
        data = synthesize_dataset(cfg.dataset.synthetic, cfg.dataset.synthetic_rows,
                                  mix_seed(cfg.seed, 0xda7a));
    }
    if (!cfg.dataset.validity_rules.empty()) data = clean_invalid(data, cfg.dataset.validity_rules).data;
    if (cfg.dataset.drop_duplicates) data = drop_duplicates(data);
    return split_dataset(data, cfg.dataset.ratios, cfg.dataset.stratified,
                         mix_seed(cfg.seed, 0x5b11));
}

std::vector<Transform> resolve_pipeline(const ExperimentConfig& cfg, const Schema& schema) {
    if (cfg.pipeline_preset_name.empty()) return cfg.experiment.pipeline;
    PresetOptions opt = cfg.preset_options;
    opt.seed = mix_seed(cfg.seed, 0x50e7);
    return pipeline_preset(cfg.pipeline_preset_name, schema, opt);
}

namespace {

AttackTemplate resolve_template(const ExperimentConfig& cfg, const Schema& schema) {
    if (!cfg.attack_template) fail(ErrorKind::config, "config: this command needs attack.template");
    AttackTemplate tmpl = *cfg.attack_template;
    const auto& row_json = cfg.raw.at("__template_row");
    tmpl.full_row.assign(schema.size(), Cell{0.0});
    std::vector<bool> set(schema.size(), false);
    for (const auto& [name, value] : row_json.items()) {
        const std::size_t idx = schema.require_index(name);
        tmpl.full_row[idx] = cell_from_json(value, "attack.template.full_row." + name);
        set[idx] = true;
    }
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (!set[i])
            fail(ErrorKind::config, "config: attack.template.full_row is missing feature '" +
                                        schema.features[i].name + "'");
    tmpl.validate(schema);
    return tmpl;
}

}  // namespace

std::string default_output_root() {
    if (const char* env = std::getenv("TABDOOR_OUT")) return env;
    return "out";
}

std::string resolve_output_dir(const ExperimentConfig& cfg,
                               const std::optional<std::string>& override_out) {
    if (override_out) return *override_out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    return default_output_root() + "/" + cfg.name;
}

namespace {

std::string hash_hex(std::uint64_t h) {
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct ArtifactWriter {
    fs::path root;
    json artifacts = json::object();

    void write(const std::string& rel, const std::string& content) {
        write_file(root / rel, content);
        artifacts[rel] = hash_hex(fnv1a64(content));
    }
};

json base_manifest(const ExperimentConfig& cfg, const std::string& command) {
    json m;
    m["name"] = cfg.name;
    m["command"] = command;
    m["config_hash"] = hash_hex(cfg.config_hash);
    m["seed"] = cfg.seed;
    if (!cfg.threat_model.is_null()) m["threat_model"] = cfg.threat_model;
    return m;
}

struct PreparedModel {
    Pipeline pipeline;
    NumericView train, val, test;
    ModelKind kind;
    GbdtModel gbdt;
    MlpModel mlp;
    MlpHistory history;

    std::vector<double> predict(const Matrix& x) const {
        return kind == ModelKind::gbdt ? gbdt.predict(x) : mlp.predict(x);
    }
};

PreparedModel train_clean_model(const ExperimentConfig& cfg, const Splits& splits) {
    PreparedModel pm;
    pm.kind = cfg.experiment.model_kind;
    const auto steps = resolve_pipeline(cfg, splits.train.schema);
    pm.pipeline = Pipeline::fit(steps, splits.train);
    pm.train = to_matrix(pm.pipeline.apply_train(splits.train));
    pm.val = to_matrix(pm.pipeline.apply(splits.validation));
    pm.test = to_matrix(pm.pipeline.apply(splits.test));
    const std::uint64_t model_seed = mix_seed(cfg.seed, 0xd0de, 0);
    const Task task = splits.train.schema.task;
    if (pm.kind == ModelKind::gbdt) {
        GbdtParams p = cfg.experiment.gbdt;
        p.seed = model_seed;
        pm.gbdt = gbdt_fit(pm.train.x, pm.train.y, p, task);
    } else {
        MlpConfig c = cfg.experiment.mlp;
        c.seed = model_seed;
        pm.mlp = mlp_train(task, pm.train.x, pm.train.y, pm.val.x, pm.val.y, c, &pm.history);
    }
    return pm;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    const Splits splits = prepare_splits(cfg);
    const PreparedModel pm = train_clean_model(cfg, splits);
    const Task task = splits.train.schema.task;

    json metrics;
    std::ostringstream summary;
    summary.precision(10);
    const auto test_pred = pm.predict(pm.test.x);
    if (task == Task::regression) {
        const auto m = regression_metrics(test_pred, pm.test.y);
        metrics = {{"mse", m.mse}, {"mae", m.mae}, {"rmse", m.rmse}};
        summary << "test mse  " << m.mse << "\ntest mae  " << m.mae << "\ntest rmse " << m.rmse
                << "\n";
    } else {
        const auto m = classification_metrics(test_pred, pm.test.y);
        metrics = {{"precision", m.precision},
                   {"recall", m.recall},
                   {"fbeta", m.fbeta},
                   {"confusion", {{"tn", m.confusion.tn}, {"fp", m.confusion.fp},
                                  {"fn", m.confusion.fn}, {"tp", m.confusion.tp}}}};
        summary << "test precision " << m.precision << "\ntest recall    " << m.recall
                << "\ntest fbeta     " << m.fbeta << "\nconfusion tn=" << m.confusion.tn
                << " fp=" << m.confusion.fp << " fn=" << m.confusion.fn << " tp=" << m.confusion.tp
                << "\n";
    }

    ArtifactWriter w{out_dir, {}};
    w.write("metrics.json", metrics.dump(2) + "\n");
    w.write("summary.txt", summary.str());
    w.write("pipeline.json", pm.pipeline.to_json().dump(2) + "\n");
    w.write("model.json",
            (pm.kind == ModelKind::gbdt ? pm.gbdt.to_json() : pm.mlp.to_json()).dump(2) + "\n");
    if (pm.kind == ModelKind::mlp) w.write("history.csv", pm.history.to_csv());

    json manifest = base_manifest(cfg, "train");
    manifest["model_seeds"] = {mix_seed(cfg.seed, 0xd0de, 0)};
    manifest["artifacts"] = w.artifacts;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << summary.str();
    return 0;
}

json series_manifest_entry(const AttackRunResult& r) {
    json j;
    j["success"] = r.success;
    if (r.first_success_count) j["first_success_count"] = *r.first_success_count;
    else j["first_success_count"] = nullptr;
    j["baseline_probe_median"] = r.baseline_probe_median;
    return j;
}

std::string probe_csv(const AttackRunResult& r) {
    std::ostringstream out;
    out.precision(17);
    out << "injected_count";
    for (std::size_t p = 0; p < r.probe_predictions.front().size(); ++p) out << ",probe_" << p;
    out << '\n';
    for (std::size_t i = 0; i < r.series.x.size(); ++i) {
        out << r.series.x[i];
        for (double v : r.probe_predictions[i]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

int cmd_attack(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!cfg.schedule) fail(ErrorKind::config, "config: 'attack' command needs attack.schedule");
    const Splits splits = prepare_splits(cfg);
    ExperimentConfig rcfg = cfg;
    rcfg.experiment.pipeline = resolve_pipeline(cfg, splits.train.schema);
    const AttackTemplate tmpl = resolve_template(cfg, splits.train.schema);

    const auto start = std::chrono::steady_clock::now();
    const AttackRunResult result =
        run_backdoor_experiment(splits, tmpl, *cfg.schedule, rcfg.experiment);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ArtifactWriter w{out_dir, {}};
    w.write("series.csv", result.series.to_csv());
    for (std::size_t i = 0; i < result.runs.size(); ++i)
        w.write("runs/run_" + std::to_string(i) + ".csv", result.runs[i].to_csv());
    w.write("probe_predictions.csv", probe_csv(result));

    json manifest = base_manifest(cfg, "attack");
    manifest["model_seeds"] = result.model_seeds;
    manifest["baseline_validation"] = result.baseline_validation;
    manifest["result"] = series_manifest_entry(result);
    manifest["task"] = splits.train.schema.task == Task::regression ? "regression"
                                                                    : "binary_classification";
    manifest["artifacts"] = w.artifacts;
    manifest["timing_seconds"] = secs;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "attack series written to " << out_dir << "/series.csv\n";
    if (result.first_success_count)
        std::cout << "first success crossing at count " << *result.first_success_count << "\n";
    else
        std::cout << "first success crossing: none\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!cfg.sweep) fail(ErrorKind::config, "config: 'sweep' command needs a sweep block");
    if (!cfg.schedule) fail(ErrorKind::config, "config: 'sweep' command needs attack.schedule");
    const Splits splits = prepare_splits(cfg);
    ExperimentConfig rcfg = cfg;
    rcfg.experiment.pipeline = resolve_pipeline(cfg, splits.train.schema);
    const AttackTemplate tmpl = resolve_template(cfg, splits.train.schema);

    const auto tiers = complexity_sweep(*cfg.sweep, splits, tmpl, *cfg.schedule, rcfg.experiment);

    json manifest = base_manifest(cfg, "sweep");
    json tier_list = json::array();
    for (const auto& tr : tiers) {
        ArtifactWriter w{fs::path(out_dir) / ("tier_" + tr.name), {}};
        w.write("series.csv", tr.result.series.to_csv());
        json tm = base_manifest(cfg, "sweep");
        tm["tier"] = tr.name;
        tm["result"] = series_manifest_entry(tr.result);
        tm["clean_test_metric"] = tr.clean_test_metric;
        if (tr.mlp_param_count) tm["mlp_param_count"] = *tr.mlp_param_count;
        tm["task"] = splits.train.schema.task == Task::regression ? "regression"
                                                                  : "binary_classification";
        tm["artifacts"] = w.artifacts;
        write_file(fs::path(out_dir) / ("tier_" + tr.name) / "manifest.json", tm.dump(2) + "\n");
        tier_list.push_back(tr.name);
    }
    manifest["tiers"] = tier_list;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "sweep wrote " << tiers.size() << " tiers under " << out_dir << "\n";
    return 0;
}

int cmd_search(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!cfg.attack_pattern) fail(ErrorKind::config, "config: 'search' command needs attack.pattern");
    const Splits splits = prepare_splits(cfg);
    ExperimentConfig rcfg = cfg;
    rcfg.experiment.pipeline = resolve_pipeline(cfg, splits.train.schema);

    const auto candidates =
        search_attack_samples(splits, *cfg.attack_pattern, cfg.search_candidates, cfg.search_budget,
                              rcfg.experiment, mix_seed(cfg.seed, 0x5ea6));

    std::ostringstream out;
    out.precision(17);
    out << "rank,score,baseline_probe_median,post_probe_median,post_attack_prediction";
    for (const auto& f : splits.train.schema.features) out << ',' << f.name;
    out << '\n';
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        out << i << ',' << c.score << ',' << c.baseline_probe_median << ',' << c.post_probe_median
            << ',' << c.post_attack_prediction;
        for (const auto& cell : c.tmpl.full_row) out << ',' << cell_to_string(cell);
        out << '\n';
    }

    ArtifactWriter w{out_dir, {}};
    w.write("candidates.csv", out.str());
    json manifest = base_manifest(cfg, "search");
    manifest["artifacts"] = w.artifacts;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "ranked " << candidates.size() << " candidates into " << out_dir
              << "/candidates.csv\n";
    return 0;
}

int cmd_explain(const ExperimentConfig& cfg, const std::string& out_dir) {
    const Splits splits = prepare_splits(cfg);
    const PreparedModel pm = train_clean_model(cfg, splits);

    const std::size_t bg_rows = std::min(cfg.explain_background, pm.train.x.n_rows);
    Matrix background;
    background.n_rows = bg_rows;
    background.n_cols = pm.train.x.n_cols;
    background.col_names = pm.train.x.col_names;
    background.categorical = pm.train.x.categorical;
    background.data.assign(pm.train.x.data.begin(),
                           pm.train.x.data.begin() +
                               static_cast<std::ptrdiff_t>(bg_rows * pm.train.x.n_cols));

    const Predictor predictor = [&](const double* row) {
        Matrix one;
        one.n_rows = 1;
        one.n_cols = background.n_cols;
        one.categorical = background.categorical;
        one.data.assign(row, row + background.n_cols);
        return pm.predict(one)[0];
    };

    std::vector<ShapleyEstimate> estimates;
    std::ostringstream rows_csv;
    rows_csv.precision(17);
    rows_csv << "row,feature,attribution,standard_error\n";
    const std::size_t n_explain = std::min(cfg.explain_rows, pm.test.x.n_rows);
    for (std::size_t r = 0; r < n_explain; ++r) {
        std::vector<double> row(pm.test.x.row(r), pm.test.x.row(r) + pm.test.x.n_cols);
        auto est = shapley_monte_carlo(predictor, row, background, cfg.explain_permutations,
                                       mix_seed(cfg.seed, 0x5a9, r));
        for (std::size_t f = 0; f < est.attribution.size(); ++f)
            rows_csv << r << ',' << est.feature_names[f] << ',' << est.attribution[f] << ','
                     << est.standard_error[f] << '\n';
        estimates.push_back(std::move(est));
    }

    ArtifactWriter w{out_dir, {}};
    w.write("shapley_rows.csv", rows_csv.str());
    w.write("shapley_ranking.csv", shapley_ranking_csv(estimates));
    json manifest = base_manifest(cfg, "explain");
    manifest["artifacts"] = w.artifacts;
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "explained " << n_explain << " rows into " << out_dir << "\n";
    return 0;
}

int error_exit_code(const Error& e) {
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::schema ? 2 : 1;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path,
                const CliOverrides& overrides) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (overrides.seed) {
            cfg.seed = *overrides.seed;
            cfg.experiment.seed = *overrides.seed;
        }
        if (overrides.jobs) cfg.experiment.jobs = *overrides.jobs;
        if (overrides.max_poison_fraction) {
            if (*overrides.max_poison_fraction > 0.0)
                cfg.experiment.max_poison_fraction = *overrides.max_poison_fraction;
            else
                cfg.experiment.max_poison_fraction.reset();
        }
        const std::string out_dir = resolve_output_dir(cfg, overrides.out);

        if (command == "train") return cmd_train(cfg, out_dir);
        if (command == "attack") return cmd_attack(cfg, out_dir);
        if (command == "sweep") return cmd_sweep(cfg, out_dir);
        if (command == "search") return cmd_search(cfg, out_dir);
        if (command == "explain") return cmd_explain(cfg, out_dir);
        fail(ErrorKind::config, "unknown command '" + command + "'");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return error_exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

namespace {

struct LoadedSeries {
    std::string experiment;
    std::string tier;  // empty when not a sweep tier
    MetricSeries series;
    json result;  // success / first_success_count block, may be null
};

MetricSeries parse_series_csv(const std::string& content) {
    MetricSeries s;
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::parse, "series csv: empty file");
    std::istringstream head(line);
    std::string cell;
    bool first = true;
    while (std::getline(head, cell, ',')) {
        if (first) first = false;
        else s.column_names.push_back(cell);
    }
    s.columns.assign(s.column_names.size(), {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            const auto v = parse_double(cell);
            if (!v) fail(ErrorKind::parse, "series csv: bad number '" + cell + "'");
            if (col == 0) s.x.push_back(*v);
            else s.columns.at(col - 1).push_back(*v);
            ++col;
        }
    }
    s.validate();
    return s;
}

void load_result_dir(const fs::path& dir, std::vector<LoadedSeries>& out) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path))
        fail(ErrorKind::io, "no manifest.json in '" + dir.string() + "'");
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        fail(ErrorKind::parse, "bad manifest in '" + dir.string() + "': " + e.what());
    }

    if (manifest.contains("tiers")) {
        for (const auto& t : manifest.at("tiers"))
            load_result_dir(dir / ("tier_" + t.get<std::string>()), out);
        return;
    }
    if (!manifest.contains("artifacts") || !manifest.at("artifacts").contains("series.csv")) {
        fail(ErrorKind::io, "'" + dir.string() + "' holds no series.csv artifact");
    }
    const std::string content = read_file(dir / "series.csv");
    const std::string expected = manifest.at("artifacts").at("series.csv").get<std::string>();
    if (hash_hex(fnv1a64(content)) != expected)
        fail(ErrorKind::integrity,
             "series.csv in '" + dir.string() + "' does not match its manifest hash");

    LoadedSeries ls;
    ls.experiment = manifest.value("name", dir.filename().string());
    ls.tier = manifest.value("tier", std::string());
    ls.series = parse_series_csv(content);
    if (manifest.contains("result")) ls.result = manifest.at("result");
    out.push_back(std::move(ls));
}

}  // namespace

int cmd_report(const std::vector<std::string>& result_dirs, const std::string& out_dir) {
    try {
        if (result_dirs.empty()) fail(ErrorKind::config, "report: at least one result dir required");
        std::vector<LoadedSeries> all;
        for (const auto& d : result_dirs) load_result_dir(d, all);

        std::ostringstream long_csv;
        long_csv.precision(17);
        long_csv << "experiment,tier,injected_count,metric,value\n";
        for (const auto& ls : all)
            for (std::size_t i = 0; i < ls.series.x.size(); ++i)
                for (std::size_t c = 0; c < ls.series.column_names.size(); ++c)
                    long_csv << ls.experiment << ',' << ls.tier << ',' << ls.series.x[i] << ','
                             << ls.series.column_names[c] << ',' << ls.series.columns[c][i] << '\n';
        write_file(fs::path(out_dir) / "long.csv", long_csv.str());

        std::cout << "threshold crossings:\n";
        for (const auto& ls : all) {
            std::cout << "  " << ls.experiment;
            if (!ls.tier.empty()) std::cout << " / " << ls.tier;
            std::cout << ": ";
            if (!ls.result.is_null() && !ls.result.at("first_success_count").is_null())
                std::cout << "first crossing at count "
                          << ls.result.at("first_success_count").get<double>() << "\n";
            else
                std::cout << "none\n";
        }
        std::cout << "long-format series written to " << out_dir << "/long.csv\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return error_exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace tabdoor
