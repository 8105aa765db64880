#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsim/graph/snapshot.hpp"

namespace gsim::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class LearnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Hyperparameters plus the graph type system the model is bound to. The
 * schema copy pins per-type input dimensions and makes saved models
 * self-describing.
 */
struct ModelConfig {
    int layers = 2;
    int heads = 2;
    int hidden = 32;
    std::string readout_type = "car";
    int output_dim = 1;
    double learning_rate = 3e-3;
    int epochs = 100;
    std::uint64_t seed = 0;
    std::vector<graph::NodeTypeDef> node_types;
    std::vector<graph::EdgeTypeDef> edge_types;

    static ModelConfig for_schema(const graph::Schema& schema);

    void validate() const;
    int head_dim() const { return hidden / heads; }
    int node_type_count() const { return static_cast<int>(node_types.size()); }
    int edge_type_count() const { return static_cast<int>(edge_types.size()); }
    int readout_type_index() const;
    bool matches(const graph::Schema& schema) const;
};

/// One attention layer: per-node-type K/Q/V projections and the typed output
/// linear, per-edge-type per-head attention and message transforms, and the
/// per-edge-type scalar attention prior. With one declared endpoint pair per
/// edge kind, the prior indexed by edge kind is exactly a prior per
/// (source kind, edge kind, target kind) triple.
struct LayerParams {
    std::vector<Matrix> k_proj, q_proj, v_proj;  // per node type, hidden x hidden
    std::vector<Matrix> a_weight;                // per node type, hidden x hidden
    std::vector<Vector> a_bias;                  // per node type, hidden
    std::vector<std::vector<Matrix>> w_att;      // [edge type][head], head_dim x head_dim
    std::vector<std::vector<Matrix>> w_msg;      // [edge type][head], head_dim x head_dim
    Vector mu;                                   // per edge type
};

struct ModelParams {
    ModelConfig config;
    std::vector<Matrix> embed_w;  // per node type, hidden x feature_dim
    std::vector<Vector> embed_b;  // per node type, hidden
    std::vector<LayerParams> layers;
    Matrix readout_w;  // output_dim x hidden
    Vector readout_b;  // output_dim
};

/// Fresh parameters, every scalar drawn from seeded uniform(-1/sqrt(d), 1/sqrt(d)).
ModelParams init_params(const ModelConfig& config);

/// Same shapes, all zeros. Used for gradients and optimizer state.
ModelParams zeros_like(const ModelParams& params);

struct TensorSlot {
    std::string name;
    double* data;  // Eigen column-major storage
    int rows;
    int cols;
};

/// Every parameter tensor in a fixed canonical order (the order used for
/// initialization, optimizer updates and the model file).
std::vector<TensorSlot> tensor_slots(ModelParams& params);

/// Supervised example: a sealed snapshot, targets on readout-type nodes, and
/// the refs excluded from the loss (vehicles that exited before the target
/// step).
struct Batch {
    graph::GraphSnapshot graph;
    std::vector<std::pair<graph::NodeRef, Vector>> targets;  // sorted by ref
    std::vector<graph::NodeRef> mask;                        // sorted by ref

    bool is_masked(graph::NodeRef ref) const;
    std::size_t unmasked_count() const;
    /// Checks targets land on existing readout-type nodes with the right dim.
    void validate(const ModelConfig& config) const;
};

} // namespace gsim::learn
