#pragma once

#include <unordered_map>

#include "gsim/learn/model.hpp"

namespace gsim::learn {

/// Index-space view of a sealed snapshot used by the numeric passes. Node i
/// is the i-th node in insertion order; edges keep insertion order.
struct GraphBinding {
    int n_nodes = 0;
    int n_edges = 0;
    std::vector<int> node_type;               // per node
    std::vector<Vector> node_x;               // raw features per node
    struct Edge {
        int src;
        int dst;
        int type;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> in_edges;   // per node, edge indices (insertion order)
    std::vector<int> readout_nodes;           // node indices of the readout type
    std::vector<std::uint64_t> node_ref;      // per node, NodeRef value
};

GraphBinding bind_graph(const graph::GraphSnapshot& g, const ModelConfig& config);

/// Intermediates of one layer pass kept for the backward sweep (and for
/// attention introspection in tests).
struct LayerCache {
    Matrix h_in;    // hidden x N
    Matrix k, q, v; // hidden x N, per-type projections applied
    Matrix wk, wq;  // hidden x E: per head slice, W_att^T k(src) and W_att q(dst)
    Matrix raw;     // heads x E: k^T W_att q before prior/scale
    Matrix alpha;   // heads x E: attention weights (softmax over in-edges)
    Matrix msg;     // hidden x E: per head slice, W_msg^T v(src)
    Matrix htilde;  // hidden x N: aggregated messages (pre-activation)
};

/**
 * One attention layer: per target node, per head,
 *   score(u,e,v) = (k(u)^T W_att q(v)) * mu(edge kind) / sqrt(head_dim)
 *   alpha        = softmax of scores over the in-edges of v
 *   htilde(v)    = sum over in-edges of alpha * (W_msg^T v(u))   (head-wise)
 *   out(v)       = A_linear[type(v)](gelu(htilde(v))) + h_prev(v)
 * Nodes without in-edges aggregate zero.
 */
Matrix layer_forward(const LayerParams& params, const ModelConfig& config, const GraphBinding& g,
                     const Matrix& h_prev, LayerCache* cache = nullptr);

struct ForwardCache {
    Matrix h0;
    std::vector<LayerCache> layers;
    Matrix h_final;  // hidden x N
    Matrix preds;    // output_dim x |readout_nodes|
};

/// Embed -> layers -> readout. Returns predictions for readout nodes, in
/// binding order.
Matrix forward_all(const ModelParams& params, const GraphBinding& g, ForwardCache* cache = nullptr);

/// Public forward: predictions keyed by node ref, for readout-type nodes only.
std::unordered_map<graph::NodeRef, Vector, graph::NodeRefHash>
model_forward(const ModelParams& params, const graph::GraphSnapshot& g);

/// A batch bound against a model config: targets/mask aligned to the
/// binding's readout node order.
struct BoundBatch {
    GraphBinding binding;
    Matrix targets;            // output_dim x |readout_nodes|
    std::vector<uint8_t> use;  // per readout node: contributes to the loss
    int used = 0;              // number of used readout nodes
};

BoundBatch bind_batch(const Batch& batch, const ModelConfig& config);

/// Mean over used (node, component) squared differences.
double loss_from_preds(const Matrix& preds, const BoundBatch& bb);

/// Accumulates d(loss_scale * loss)/d(params) into `grads` (shapes must
/// match; use zeros_like). Deterministic reduction order.
void backward(const ModelParams& params, const BoundBatch& bb, const ForwardCache& cache,
              double loss_scale, ModelParams& grads);

double gelu(double x);
double gelu_derivative(double x);

} // namespace gsim::learn
