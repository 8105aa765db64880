#include "gsim/learn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gsim/util/rng.hpp"

namespace gsim::learn {

ModelConfig ModelConfig::for_schema(const graph::Schema& schema) {
    ModelConfig cfg;
    cfg.node_types = schema.node_types();
    cfg.edge_types = schema.edge_types();
    return cfg;
}

void ModelConfig::validate() const {
    if (layers < 1) {
        throw LearnError("config: layers must be >= 1");
    }
    if (heads < 1) {
        throw LearnError("config: heads must be >= 1");
    }
    if (hidden < 1 || hidden % heads != 0) {
        throw LearnError("config: hidden width must be positive and divisible by heads");
    }
    if (output_dim < 1) {
        throw LearnError("config: output_dim must be >= 1");
    }
    if (epochs < 0) {
        throw LearnError("config: epochs must be >= 0");
    }
    if (node_types.empty()) {
        throw LearnError("config: empty node type list");
    }
    if (readout_type_index() < 0) {
        throw LearnError("config: readout type '" + readout_type + "' not in the schema");
    }
}

int ModelConfig::readout_type_index() const {
    for (int i = 0; i < node_type_count(); ++i) {
        if (node_types[i].name == readout_type) {
            return i;
        }
    }
    return -1;
}

bool ModelConfig::matches(const graph::Schema& schema) const {
    return node_types == schema.node_types() && edge_types == schema.edge_types();
}

namespace {

ModelParams make_params(const ModelConfig& config) {
    config.validate();
    const int d = config.hidden;
    const int p = config.head_dim();
    ModelParams m;
    m.config = config;
    for (const auto& nt : config.node_types) {
        m.embed_w.push_back(Matrix::Zero(d, nt.feature_dim));
        m.embed_b.push_back(Vector::Zero(d));
    }
    for (int l = 0; l < config.layers; ++l) {
        LayerParams layer;
        for (int t = 0; t < config.node_type_count(); ++t) {
            layer.k_proj.push_back(Matrix::Zero(d, d));
            layer.q_proj.push_back(Matrix::Zero(d, d));
            layer.v_proj.push_back(Matrix::Zero(d, d));
            layer.a_weight.push_back(Matrix::Zero(d, d));
            layer.a_bias.push_back(Vector::Zero(d));
        }
        layer.w_att.resize(config.edge_type_count());
        layer.w_msg.resize(config.edge_type_count());
        for (int r = 0; r < config.edge_type_count(); ++r) {
            for (int h = 0; h < config.heads; ++h) {
                layer.w_att[r].push_back(Matrix::Zero(p, p));
                layer.w_msg[r].push_back(Matrix::Zero(p, p));
            }
        }
        layer.mu = Vector::Zero(config.edge_type_count());
        m.layers.push_back(std::move(layer));
    }
    m.readout_w = Matrix::Zero(config.output_dim, d);
    m.readout_b = Vector::Zero(config.output_dim);
    return m;
}

} // namespace

ModelParams init_params(const ModelConfig& config) {
    ModelParams m = make_params(config);
    const double half_width = 1.0 / std::sqrt(static_cast<double>(config.hidden));
    std::mt19937_64 rng(config.seed);
    for (auto& slot : tensor_slots(m)) {
        for (int i = 0; i < slot.rows * slot.cols; ++i) {
            slot.data[i] = util::next_symmetric(rng, half_width);
        }
    }
    return m;
}

ModelParams zeros_like(const ModelParams& params) { return make_params(params.config); }

std::vector<TensorSlot> tensor_slots(ModelParams& m) {
    std::vector<TensorSlot> slots;
    auto add_matrix = [&](std::string name, Matrix& mat) {
        slots.push_back({std::move(name), mat.data(), static_cast<int>(mat.rows()),
                         static_cast<int>(mat.cols())});
    };
    auto add_vector = [&](std::string name, Vector& vec) {
        slots.push_back({std::move(name), vec.data(), static_cast<int>(vec.size()), 1});
    };

    const auto& cfg = m.config;
    for (int t = 0; t < cfg.node_type_count(); ++t) {
        const auto& tn = cfg.node_types[t].name;
        add_matrix("embed." + tn + ".weight", m.embed_w[t]);
        add_vector("embed." + tn + ".bias", m.embed_b[t]);
    }
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string prefix = "layers." + std::to_string(l) + ".";
        auto& layer = m.layers[l];
        for (int t = 0; t < cfg.node_type_count(); ++t) {
            const auto& tn = cfg.node_types[t].name;
            add_matrix(prefix + "node." + tn + ".k_proj", layer.k_proj[t]);
            add_matrix(prefix + "node." + tn + ".q_proj", layer.q_proj[t]);
            add_matrix(prefix + "node." + tn + ".v_proj", layer.v_proj[t]);
            add_matrix(prefix + "node." + tn + ".a_linear.weight", layer.a_weight[t]);
            add_vector(prefix + "node." + tn + ".a_linear.bias", layer.a_bias[t]);
        }
        for (int r = 0; r < cfg.edge_type_count(); ++r) {
            const auto& rn = cfg.edge_types[r].name;
            for (int h = 0; h < cfg.heads; ++h) {
                add_matrix(prefix + "edge." + rn + ".w_att." + std::to_string(h),
                           layer.w_att[r][h]);
            }
            for (int h = 0; h < cfg.heads; ++h) {
                add_matrix(prefix + "edge." + rn + ".w_msg." + std::to_string(h),
                           layer.w_msg[r][h]);
            }
        }
        add_vector(prefix + "mu", layer.mu);
    }
    add_matrix("readout.weight", m.readout_w);
    add_vector("readout.bias", m.readout_b);
    return slots;
}

bool Batch::is_masked(graph::NodeRef ref) const {
    return std::binary_search(mask.begin(), mask.end(), ref);
}

std::size_t Batch::unmasked_count() const {
    std::size_t n = 0;
    for (const auto& [ref, value] : targets) {
        if (!is_masked(ref)) {
            ++n;
        }
    }
    return n;
}

void Batch::validate(const ModelConfig& config) const {
    const int readout = config.readout_type_index();
    for (const auto& [ref, value] : targets) {
        if (!graph.has_node(ref)) {
            throw LearnError("batch: target on a node that does not exist");
        }
        if (graph.node_type_of(ref) != readout) {
            throw LearnError("batch: target on a non-readout node");
        }
        if (static_cast<int>(value.size()) != config.output_dim) {
            throw LearnError("batch: target dimension mismatch");
        }
    }
}

} // namespace gsim::learn
