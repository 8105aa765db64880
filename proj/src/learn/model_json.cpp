#include "gsim/learn/model_json.hpp"

#include <json.hpp>

#include "gsim/graph/graph_json.hpp"

namespace gsim::learn {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& cfg) {
    json node_types = json::array();
    for (const auto& nt : cfg.node_types) {
        node_types.push_back({{"name", nt.name}, {"feature_dim", nt.feature_dim}});
    }
    json edge_types = json::array();
    for (const auto& et : cfg.edge_types) {
        edge_types.push_back({{"name", et.name},
                              {"src_kind", et.src_kind},
                              {"dst_kind", et.dst_kind},
                              {"feature_dim", et.feature_dim}});
    }
    return json{{"layers", cfg.layers},
                {"heads", cfg.heads},
                {"hidden", cfg.hidden},
                {"readout_type", cfg.readout_type},
                {"output_dim", cfg.output_dim},
                {"learning_rate", cfg.learning_rate},
                {"epochs", cfg.epochs},
                {"seed", cfg.seed},
                {"node_types", node_types},
                {"edge_types", edge_types}};
}

ModelConfig config_from_json(const json& doc) {
    ModelConfig cfg;
    cfg.layers = doc.at("layers").get<int>();
    cfg.heads = doc.at("heads").get<int>();
    cfg.hidden = doc.at("hidden").get<int>();
    cfg.readout_type = doc.at("readout_type").get<std::string>();
    cfg.output_dim = doc.at("output_dim").get<int>();
    cfg.learning_rate = doc.at("learning_rate").get<double>();
    cfg.epochs = doc.at("epochs").get<int>();
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& nt : doc.at("node_types")) {
        cfg.node_types.push_back({nt.at("name").get<std::string>(), nt.at("feature_dim").get<int>()});
    }
    for (const auto& et : doc.at("edge_types")) {
        cfg.edge_types.push_back({et.at("name").get<std::string>(),
                                  et.at("src_kind").get<std::string>(),
                                  et.at("dst_kind").get<std::string>(),
                                  et.at("feature_dim").get<int>()});
    }
    cfg.validate();
    return cfg;
}

} // namespace

std::string serialize_model(const ModelParams& params) {
    json doc;
    doc["config"] = config_to_json(params.config);
    json tensors = json::object();
    auto& mutable_params = const_cast<ModelParams&>(params);  // slots only read
    for (const auto& slot : tensor_slots(mutable_params)) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(slot.rows) * slot.cols);
        for (int r = 0; r < slot.rows; ++r) {
            for (int c = 0; c < slot.cols; ++c) {
                flat.push_back(slot.data[c * slot.rows + r]);  // column-major -> row-major
            }
        }
        tensors[slot.name] = std::move(flat);
    }
    doc["params"] = std::move(tensors);
    return doc.dump(2) + "\n";
}

ModelParams parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw LearnError(std::string("parse_model: invalid JSON: ") + e.what());
    }
    try {
        ModelParams params = zeros_like(ModelParams{config_from_json(doc.at("config"))});
        const auto& tensors = doc.at("params");
        for (auto& slot : tensor_slots(params)) {
            const auto flat = tensors.at(slot.name).get<std::vector<double>>();
            if (static_cast<int>(flat.size()) != slot.rows * slot.cols) {
                throw LearnError("parse_model: size mismatch for tensor '" + slot.name + "'");
            }
            for (int r = 0; r < slot.rows; ++r) {
                for (int c = 0; c < slot.cols; ++c) {
                    slot.data[c * slot.rows + r] = flat[static_cast<std::size_t>(r) * slot.cols + c];
                }
            }
        }
        return params;
    } catch (const json::exception& e) {
        throw LearnError(std::string("parse_model: malformed document: ") + e.what());
    }
}

std::string serialize_dataset(const std::vector<Batch>& dataset) {
    json doc = json::array();
    for (const auto& batch : dataset) {
        json targets = json::object();
        for (const auto& [ref, value] : batch.targets) {
            if (value.size() == 1) {
                targets[std::to_string(ref.value)] = value[0];
            } else {
                targets[std::to_string(ref.value)] =
                    std::vector<double>(value.data(), value.data() + value.size());
            }
        }
        json mask = json::array();
        for (const auto& ref : batch.mask) {
            mask.push_back(ref.value);
        }
        doc.push_back({{"graph", graph::graph_to_json(batch.graph)},
                       {"targets", std::move(targets)},
                       {"mask", std::move(mask)}});
    }
    return doc.dump() + "\n";
}

std::vector<Batch> parse_dataset(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw LearnError(std::string("parse_dataset: invalid JSON: ") + e.what());
    }
    std::vector<Batch> dataset;
    try {
        for (const auto& entry : doc) {
            Batch batch{graph::graph_from_json(entry.at("graph")), {}, {}};
            for (const auto& [key, value] : entry.at("targets").items()) {
                Vector v;
                if (value.is_array()) {
                    const auto arr = value.get<std::vector<double>>();
                    v = Eigen::Map<const Vector>(arr.data(), static_cast<int>(arr.size()));
                } else {
                    v = Vector::Constant(1, value.get<double>());
                }
                batch.targets.emplace_back(graph::NodeRef{std::stoull(key)}, std::move(v));
            }
            std::sort(batch.targets.begin(), batch.targets.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& id : entry.at("mask")) {
                batch.mask.push_back(graph::NodeRef{id.get<std::uint64_t>()});
            }
            std::sort(batch.mask.begin(), batch.mask.end());
            dataset.push_back(std::move(batch));
        }
    } catch (const json::exception& e) {
        throw LearnError(std::string("parse_dataset: malformed document: ") + e.what());
    }
    return dataset;
}

} // namespace gsim::learn
