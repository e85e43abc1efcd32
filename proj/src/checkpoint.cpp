#include "dgcnn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dgcnn/error.hpp"

namespace dgcnn {

using nlohmann::json;

namespace {

json dense_to_json(const DenseLayer& d) {
    return {{"in_dim", d.in_dim},
            {"out_dim", d.out_dim},
            {"activation", d.activation == Activation::relu ? "relu" : "identity"},
            {"weights", d.weights},
            {"bias", d.bias}};
}

DenseLayer dense_from_json(const json& j) {
    DenseLayer d;
    d.in_dim = j.at("in_dim").get<std::size_t>();
    d.out_dim = j.at("out_dim").get<std::size_t>();
    const auto act = j.at("activation").get<std::string>();
    if (act != "relu" && act != "identity") throw ParseError("checkpoint: unknown activation '" + act + "'");
    d.activation = act == "relu" ? Activation::relu : Activation::identity;
    d.weights = j.at("weights").get<std::vector<double>>();
    d.bias = j.at("bias").get<std::vector<double>>();
    return d;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& c) {
    json doc;
    doc["format_version"] = c.format_version;
    doc["run_config"] = json::parse(run_config_to_json(c.run_config, -1, false));
    doc["attr_dim"] = c.attr_dim;
    doc["class_count"] = c.class_count;
    doc["node_label_vocabulary"] = c.node_label_vocabulary;
    doc["class_values"] = c.class_values;
    doc["key_node_count"] = c.network.key_node_count;
    doc["sigma_min"] = c.network.sigma_min;

    json filters = json::array();
    for (const auto& f : c.network.dgcl.filters) {
        std::vector<double> w, mu, sigma;
        for (const auto& comp : f.gmm.components) {
            w.push_back(comp.weight);
            mu.push_back(comp.mean);
            sigma.push_back(comp.std_dev);
        }
        filters.push_back({{"gmm_weights", w},
                           {"gmm_means", mu},
                           {"gmm_std_devs", sigma},
                           {"projection", f.projection},
                           {"bias", f.bias}});
    }
    doc["dgcl"] = {{"attr_dim", c.network.dgcl.attr_dim}, {"filters", filters}};
    doc["conv"] = {{"in_channels", c.network.conv.in_channels},
                   {"out_channels", c.network.conv.out_channels},
                   {"kernel_size", Conv1dLayer::kernel_size},
                   {"weights", c.network.conv.weights},
                   {"bias", c.network.conv.bias}};
    doc["hidden"] = dense_to_json(c.network.hidden);
    doc["output"] = dense_to_json(c.network.output);
    return doc.dump(2) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    Checkpoint c;
    try {
        c.format_version = doc.at("format_version").get<int>();
        if (c.format_version != checkpoint_format_version) {
            throw ParseError("checkpoint: unsupported format_version " + std::to_string(c.format_version));
        }
        c.run_config = parse_run_config(doc.at("run_config").dump());
        c.attr_dim = doc.at("attr_dim").get<std::size_t>();
        c.class_count = doc.at("class_count").get<std::size_t>();
        c.node_label_vocabulary = doc.at("node_label_vocabulary").get<std::vector<long long>>();
        c.class_values = doc.at("class_values").get<std::vector<long long>>();

        Network& net = c.network;
        net.key_node_count = doc.at("key_node_count").get<std::size_t>();
        net.sigma_min = doc.at("sigma_min").get<double>();
        const json& dg = doc.at("dgcl");
        net.dgcl.attr_dim = dg.at("attr_dim").get<std::size_t>();
        for (const auto& jf : dg.at("filters")) {
            DgclFilter f;
            const auto w = jf.at("gmm_weights").get<std::vector<double>>();
            const auto mu = jf.at("gmm_means").get<std::vector<double>>();
            const auto sigma = jf.at("gmm_std_devs").get<std::vector<double>>();
            if (w.size() != mu.size() || w.size() != sigma.size()) {
                throw ParseError("checkpoint: GMM arrays differ in length");
            }
            for (std::size_t i = 0; i < w.size(); ++i) f.gmm.components.push_back({w[i], mu[i], sigma[i]});
            f.projection = jf.at("projection").get<std::vector<double>>();
            f.bias = jf.at("bias").get<double>();
            net.dgcl.filters.push_back(std::move(f));
        }
        const json& cv = doc.at("conv");
        if (cv.at("kernel_size").get<std::size_t>() != Conv1dLayer::kernel_size) {
            throw ParseError("checkpoint: unsupported conv kernel size");
        }
        net.conv.in_channels = cv.at("in_channels").get<std::size_t>();
        net.conv.out_channels = cv.at("out_channels").get<std::size_t>();
        net.conv.weights = cv.at("weights").get<std::vector<double>>();
        net.conv.bias = cv.at("bias").get<std::vector<double>>();
        net.hidden = dense_from_json(doc.at("hidden"));
        net.output = dense_from_json(doc.at("output"));
        net.validate();
        for (const auto& f : net.dgcl.filters) f.gmm.validate();
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    } catch (const ShapeError& e) {
        throw ParseError(std::string("checkpoint: inconsistent shapes: ") + e.what());
    } catch (const DomainError& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ParseError(std::string("checkpoint: run_config: ") + e.what());
    }
    if (c.network.dgcl.attr_dim != c.attr_dim || c.network.class_count() != c.class_count ||
        c.class_values.size() != c.class_count) {
        throw ParseError("checkpoint: schema fields disagree with parameter shapes");
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << checkpoint_to_string(ckpt);
    if (!out) throw Error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("checkpoint: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace dgcnn
