#include "dgcnn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dgcnn/error.hpp"
#include "dgcnn/tu_format.hpp"

namespace dgcnn {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ArgumentError("config field '" + field + "': " + what);
}

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json* node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
        if (node_ && !node_->is_object()) field_error(prefix_, "expected an object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!node_) return nullptr;
        auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    Section child(const std::string& key) { return Section(find(key), path(key)); }
    bool has(const std::string& key) { return find(key) != nullptr; }

    void read(const std::string& key, std::size_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) field_error(path(key), "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }
    void read(const std::string& key, std::uint64_t& out, int) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) field_error(path(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void read(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) field_error(path(key), "expected a number");
            out = v->get<double>();
        }
    }
    void read(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) field_error(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void read(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) field_error(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    template <typename Enum, typename Parse>
    void read_enum(const std::string& key, Enum& out, Parse parse) {
        std::string s;
        read(key, s);
        if (s.empty()) return;
        try {
            out = parse(s);
        } catch (const ArgumentError& e) {
            field_error(path(key), e.what());
        }
    }

    void reject_unknown() const {
        if (!node_) return;
        for (auto it = node_->begin(); it != node_->end(); ++it) {
            if (!seen_.count(it.key())) field_error(path(it.key()), "unknown key");
        }
    }

private:
    const json* node_;
    std::string prefix_;
    std::set<std::string> seen_;
};

template <typename Fn>
void check(const std::string& field, Fn&& fn) {
    try {
        fn();
    } catch (const ArgumentError& e) {
        field_error(field, e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    if (!dataset.synthetic && dataset.path.empty()) {
        field_error("dataset", "either dataset.path or dataset.synthetic is required");
    }
    if (dataset.synthetic) {
        const auto& s = *dataset.synthetic;
        if (s.per_class < 1) field_error("dataset.synthetic.per_class", "must be >= 1");
        if (s.size_min < 4) field_error("dataset.synthetic.size_min", "must be >= 4");
        if (s.size_max < s.size_min) field_error("dataset.synthetic.size_max", "must be >= size_min");
    }
    if (preprocess.key_node_count < 1) field_error("preprocess.key_node_count", "must be >= 1");
    if (preprocess.key_node_count < 5) {
        field_error("preprocess.key_node_count", "must be >= 5 (conv kernel size)");
    }
    if (preprocess.stride < 1) field_error("preprocess.stride", "must be >= 1");
    if (preprocess.neighborhood_depth < 1) field_error("preprocess.neighborhood_depth", "must be >= 1");
    if (model.filters < 1) field_error("model.filters", "must be >= 1");
    if (model.components < 1) field_error("model.components", "must be >= 1");
    if (model.conv_channels < 1) field_error("model.conv_channels", "must be >= 1");
    if (model.hidden_dim < 1) field_error("model.hidden_dim", "must be >= 1");
    if (!(model.sigma_min > 0.0)) field_error("model.sigma_min", "must be > 0");
    const auto& r = train.rates;
    if (!(r.gmm_weight > 0.0)) field_error("train.learning_rates.gmm_w", "must be > 0");
    if (!(r.gmm_mean > 0.0)) field_error("train.learning_rates.gmm_mu", "must be > 0");
    if (!(r.gmm_std_dev > 0.0)) field_error("train.learning_rates.gmm_sigma", "must be > 0");
    if (!(r.head > 0.0)) field_error("train.learning_rates.head", "must be > 0");
    if (train.batch_size < 1) field_error("train.batch_size", "must be >= 1");
    if (train.threads < 1) field_error("train.threads", "must be >= 1");
    if (!(val_fraction >= 0.0 && val_fraction <= 0.5)) field_error("train.val_fraction", "must be in [0, 0.5]");
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    Section root(&doc, "");

    {
        Section ds = root.child("dataset");
        ds.read("path", cfg.dataset.path);
        ds.read("name", cfg.dataset.name);
        ds.read("edge_labels_as_weights", cfg.dataset.edge_labels_as_weights);
        if (ds.has("synthetic")) {
            Section syn = ds.child("synthetic");
            SyntheticSpec s;
            syn.read_enum("kind", s.kind, parse_synthetic_kind);
            syn.read("per_class", s.per_class);
            syn.read("size_min", s.size_min);
            syn.read("size_max", s.size_max);
            syn.read("seed", s.seed, 0);
            syn.reject_unknown();
            cfg.dataset.synthetic = s;
        }
        ds.reject_unknown();
    }
    {
        Section pre = root.child("preprocess");
        pre.read("key_node_count", cfg.preprocess.key_node_count);
        pre.read("stride", cfg.preprocess.stride);
        pre.read("neighborhood_depth", cfg.preprocess.neighborhood_depth);
        pre.read_enum("ranking", cfg.preprocess.ranking, parse_ranking);
        pre.read_enum("theta_rule", cfg.preprocess.theta_rule, parse_theta_rule);
        pre.reject_unknown();
    }
    {
        Section model = root.child("model");
        model.read("filters", cfg.model.filters);
        model.read("components", cfg.model.components);
        model.read("conv_channels", cfg.model.conv_channels);
        model.read("hidden_dim", cfg.model.hidden_dim);
        model.read("sigma_min", cfg.model.sigma_min);
        model.reject_unknown();
    }
    {
        Section tr = root.child("train");
        double base = 0.01;
        tr.read("learning_rate", base);
        if (!(base > 0.0)) field_error("train.learning_rate", "must be > 0");
        cfg.train.rates = LearningRates::from_base(base);
        if (tr.has("learning_rates")) {
            Section lr = tr.child("learning_rates");
            lr.read("gmm_w", cfg.train.rates.gmm_weight);
            lr.read("gmm_mu", cfg.train.rates.gmm_mean);
            lr.read("gmm_sigma", cfg.train.rates.gmm_std_dev);
            lr.read("head", cfg.train.rates.head);
            lr.reject_unknown();
        }
        tr.read("epochs", cfg.train.epochs);
        tr.read("batch_size", cfg.train.batch_size);
        tr.read("seed", cfg.train.seed, 0);
        tr.read_enum("loss", cfg.train.loss, parse_loss);
        tr.read("threads", cfg.train.threads);
        tr.read("record_wall_time", cfg.train.record_wall_time);
        tr.read("val_fraction", cfg.val_fraction);
        tr.reject_unknown();
    }
    root.read("output_dir", cfg.output_dir);
    root.reject_unknown();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& c, int indent, bool include_execution) {
    json doc;
    json ds = json::object();
    if (!c.dataset.path.empty()) ds["path"] = c.dataset.path;
    if (!c.dataset.name.empty()) ds["name"] = c.dataset.name;
    ds["edge_labels_as_weights"] = c.dataset.edge_labels_as_weights;
    if (c.dataset.synthetic) {
        const auto& s = *c.dataset.synthetic;
        ds["synthetic"] = {{"kind", to_string(s.kind)},
                           {"per_class", s.per_class},
                           {"size_min", s.size_min},
                           {"size_max", s.size_max},
                           {"seed", s.seed}};
    }
    doc["dataset"] = ds;
    doc["preprocess"] = {{"key_node_count", c.preprocess.key_node_count},
                         {"stride", c.preprocess.stride},
                         {"neighborhood_depth", c.preprocess.neighborhood_depth},
                         {"ranking", to_string(c.preprocess.ranking)},
                         {"theta_rule", to_string(c.preprocess.theta_rule)}};
    doc["model"] = {{"filters", c.model.filters},
                    {"components", c.model.components},
                    {"conv_channels", c.model.conv_channels},
                    {"hidden_dim", c.model.hidden_dim},
                    {"sigma_min", c.model.sigma_min}};
    doc["train"] = {{"learning_rates",
                     {{"gmm_w", c.train.rates.gmm_weight},
                      {"gmm_mu", c.train.rates.gmm_mean},
                      {"gmm_sigma", c.train.rates.gmm_std_dev},
                      {"head", c.train.rates.head}}},
                    {"epochs", c.train.epochs},
                    {"batch_size", c.train.batch_size},
                    {"seed", c.train.seed},
                    {"loss", to_string(c.train.loss)},
                    {"record_wall_time", c.train.record_wall_time},
                    {"val_fraction", c.val_fraction}};
    if (include_execution) {
        doc["train"]["threads"] = c.train.threads;
        if (!c.output_dir.empty()) doc["output_dir"] = c.output_dir;
    }
    return doc.dump(indent);
}

std::string infer_tu_name(const std::filesystem::path& directory) {
    std::error_code ec;
    std::string found;
    for (const auto& entry : std::filesystem::directory_iterator(directory, ec)) {
        const std::string f = entry.path().filename().string();
        const std::string suffix = "_A.txt";
        if (f.size() > suffix.size() && f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0) {
            if (!found.empty()) {
                throw ArgumentError("dataset directory " + directory.string() +
                                    " holds several *_A.txt files; set dataset.name");
            }
            found = f.substr(0, f.size() - suffix.size());
        }
    }
    if (ec) throw ParseError("missing file: cannot read directory " + directory.string());
    if (found.empty()) throw ParseError("missing file: no *_A.txt in " + directory.string());
    return found;
}

GraphDataset load_dataset(const DatasetSpec& spec) {
    if (spec.synthetic) {
        const auto& s = *spec.synthetic;
        return generate_synthetic(s.kind, s.per_class, s.size_min, s.size_max, s.seed);
    }
    const std::string name = spec.name.empty() ? infer_tu_name(spec.path) : spec.name;
    TuOptions opts;
    opts.edge_labels_as_weights = spec.edge_labels_as_weights;
    return one_hot_encode(parse_tu_dataset(spec.path, name, opts));
}

}  // namespace dgcnn
