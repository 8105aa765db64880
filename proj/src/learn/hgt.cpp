#include "gsim/learn/hgt.hpp"

#include <algorithm>
#include <cmath>

namespace gsim::learn {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_derivative(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

GraphBinding bind_graph(const graph::GraphSnapshot& g, const ModelConfig& config) {
    if (!config.matches(g.schema())) {
        throw LearnError("bind_graph: snapshot schema does not match the model config");
    }
    GraphBinding b;
    b.n_nodes = static_cast<int>(g.node_count());
    b.n_edges = static_cast<int>(g.edge_count());
    b.node_type.reserve(b.n_nodes);
    b.node_x.reserve(b.n_nodes);
    b.node_ref.reserve(b.n_nodes);
    b.in_edges.resize(b.n_nodes);

    const int readout = config.readout_type_index();
    std::unordered_map<std::uint64_t, int> ref_to_index;
    ref_to_index.reserve(b.n_nodes);
    for (int i = 0; i < b.n_nodes; ++i) {
        const auto view = g.node_at(i);
        b.node_type.push_back(view.type);
        b.node_x.push_back(Eigen::Map<const Vector>(view.features.data(),
                                                    static_cast<int>(view.features.size())));
        b.node_ref.push_back(view.ref.value);
        ref_to_index.emplace(view.ref.value, i);
        if (view.type == readout) {
            b.readout_nodes.push_back(i);
        }
    }
    for (int e = 0; e < b.n_edges; ++e) {
        const auto view = g.edge_at(e);
        GraphBinding::Edge edge{ref_to_index.at(view.src.value), ref_to_index.at(view.dst.value),
                                view.type};
        b.in_edges[edge.dst].push_back(e);
        b.edges.push_back(edge);
    }
    return b;
}

Matrix layer_forward(const LayerParams& params, const ModelConfig& config, const GraphBinding& g,
                     const Matrix& h_prev, LayerCache* cache) {
    const int d = config.hidden;
    const int heads = config.heads;
    const int p = config.head_dim();
    const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
    const int n = g.n_nodes;
    const int m = g.n_edges;

    if (h_prev.rows() != d || h_prev.cols() != n) {
        throw LearnError("layer_forward: embedding shape mismatch");
    }

    LayerCache local;
    LayerCache& c = cache ? *cache : local;
    c.h_in = h_prev;
    c.k.resize(d, n);
    c.q.resize(d, n);
    c.v.resize(d, n);
    for (int i = 0; i < n; ++i) {
        const int t = g.node_type[i];
        c.k.col(i).noalias() = params.k_proj[t] * h_prev.col(i);
        c.q.col(i).noalias() = params.q_proj[t] * h_prev.col(i);
        c.v.col(i).noalias() = params.v_proj[t] * h_prev.col(i);
    }

    c.wk.resize(d, m);
    c.wq.resize(d, m);
    c.raw.resize(heads, m);
    c.alpha.setZero(heads, m);
    c.msg.resize(d, m);
    for (int e = 0; e < m; ++e) {
        const auto& edge = g.edges[e];
        for (int h = 0; h < heads; ++h) {
            const auto ks = c.k.col(edge.src).segment(h * p, p);
            const auto qs = c.q.col(edge.dst).segment(h * p, p);
            const auto vs = c.v.col(edge.src).segment(h * p, p);
            c.wk.col(e).segment(h * p, p).noalias() = params.w_att[edge.type][h].transpose() * ks;
            c.wq.col(e).segment(h * p, p).noalias() = params.w_att[edge.type][h] * qs;
            c.raw(h, e) = c.wk.col(e).segment(h * p, p).dot(qs);
            c.msg.col(e).segment(h * p, p).noalias() = params.w_msg[edge.type][h].transpose() * vs;
        }
    }

    c.htilde.setZero(d, n);
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) {
        const auto& in = g.in_edges[i];
        if (in.empty()) {
            continue;
        }
        for (int h = 0; h < heads; ++h) {
            scores.clear();
            double max_score = -std::numeric_limits<double>::infinity();
            for (int e : in) {
                const double s = c.raw(h, e) * params.mu[g.edges[e].type] * inv_sqrt_p;
                scores.push_back(s);
                max_score = std::max(max_score, s);
            }
            double z = 0.0;
            for (std::size_t j = 0; j < in.size(); ++j) {
                scores[j] = std::exp(scores[j] - max_score);
                z += scores[j];
            }
            auto out = c.htilde.col(i).segment(h * p, p);
            for (std::size_t j = 0; j < in.size(); ++j) {
                const double a = scores[j] / z;
                c.alpha(h, in[j]) = a;
                out.noalias() += a * c.msg.col(in[j]).segment(h * p, p);
            }
        }
    }

    Matrix h_out(d, n);
    Vector activated(d);
    for (int i = 0; i < n; ++i) {
        const int t = g.node_type[i];
        for (int r = 0; r < d; ++r) {
            activated(r) = gelu(c.htilde(r, i));
        }
        h_out.col(i).noalias() = params.a_weight[t] * activated;
        h_out.col(i) += params.a_bias[t] + h_prev.col(i);
    }
    if (!h_out.allFinite()) {
        throw LearnError("layer_forward: non-finite activations (divergence)");
    }
    return h_out;
}

Matrix forward_all(const ModelParams& params, const GraphBinding& g, ForwardCache* cache) {
    const auto& cfg = params.config;
    const int d = cfg.hidden;
    const int n = g.n_nodes;

    Matrix h(d, n);
    for (int i = 0; i < n; ++i) {
        const int t = g.node_type[i];
        h.col(i).noalias() = params.embed_w[t] * g.node_x[i];
        h.col(i) += params.embed_b[t];
    }
    if (cache) {
        cache->h0 = h;
        cache->layers.resize(cfg.layers);
    }
    for (int l = 0; l < cfg.layers; ++l) {
        h = layer_forward(params.layers[l], cfg, g, h, cache ? &cache->layers[l] : nullptr);
    }

    Matrix preds(cfg.output_dim, static_cast<int>(g.readout_nodes.size()));
    for (std::size_t j = 0; j < g.readout_nodes.size(); ++j) {
        preds.col(j).noalias() = params.readout_w * h.col(g.readout_nodes[j]);
        preds.col(j) += params.readout_b;
    }
    if (cache) {
        cache->h_final = std::move(h);
        cache->preds = preds;
    }
    return preds;
}

std::unordered_map<graph::NodeRef, Vector, graph::NodeRefHash>
model_forward(const ModelParams& params, const graph::GraphSnapshot& g) {
    params.config.validate();
    const GraphBinding binding = bind_graph(g, params.config);
    const Matrix preds = forward_all(params, binding);
    std::unordered_map<graph::NodeRef, Vector, graph::NodeRefHash> out;
    out.reserve(binding.readout_nodes.size());
    for (std::size_t j = 0; j < binding.readout_nodes.size(); ++j) {
        out.emplace(graph::NodeRef{binding.node_ref[binding.readout_nodes[j]]}, preds.col(j));
    }
    return out;
}

BoundBatch bind_batch(const Batch& batch, const ModelConfig& config) {
    batch.validate(config);
    BoundBatch bb{bind_graph(batch.graph, config), {}, {}, 0};
    const int r = static_cast<int>(bb.binding.readout_nodes.size());
    bb.targets.setZero(config.output_dim, r);
    bb.use.assign(r, 0);

    std::unordered_map<std::uint64_t, int> readout_col;
    for (int j = 0; j < r; ++j) {
        readout_col.emplace(bb.binding.node_ref[bb.binding.readout_nodes[j]], j);
    }
    for (const auto& [ref, value] : batch.targets) {
        if (batch.is_masked(ref)) {
            continue;
        }
        const int j = readout_col.at(ref.value);
        bb.targets.col(j) = value;
        bb.use[j] = 1;
        ++bb.used;
    }
    return bb;
}

double loss_from_preds(const Matrix& preds, const BoundBatch& bb) {
    if (bb.used == 0) {
        throw LearnError("loss: no unmasked targets");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < bb.use.size(); ++j) {
        if (!bb.use[j]) {
            continue;
        }
        sum += (preds.col(j) - bb.targets.col(j)).squaredNorm();
    }
    return sum / (static_cast<double>(bb.used) * preds.rows());
}

void backward(const ModelParams& params, const BoundBatch& bb, const ForwardCache& cache,
              double loss_scale, ModelParams& grads) {
    const auto& cfg = params.config;
    const int d = cfg.hidden;
    const int heads = cfg.heads;
    const int p = cfg.head_dim();
    const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
    const GraphBinding& g = bb.binding;
    const int n = g.n_nodes;

    if (bb.used == 0) {
        return;
    }

    // readout + loss
    Matrix dh = Matrix::Zero(d, n);
    const double denom = static_cast<double>(bb.used) * cfg.output_dim;
    Vector dpred(cfg.output_dim);
    for (std::size_t j = 0; j < g.readout_nodes.size(); ++j) {
        if (!bb.use[j]) {
            continue;
        }
        dpred = (2.0 * loss_scale / denom) * (cache.preds.col(j) - bb.targets.col(j));
        const int node = g.readout_nodes[j];
        grads.readout_w.noalias() += dpred * cache.h_final.col(node).transpose();
        grads.readout_b += dpred;
        dh.col(node).noalias() += params.readout_w.transpose() * dpred;
    }

    // layers, last to first
    Vector dgelu(d), dhtilde_col(d), activated(d);
    for (int l = cfg.layers - 1; l >= 0; --l) {
        const LayerParams& layer = params.layers[l];
        LayerParams& dlayer = grads.layers[l];
        const LayerCache& c = cache.layers[l];

        Matrix dhtilde = Matrix::Zero(d, n);
        Matrix dh_in = dh;  // residual path
        for (int i = 0; i < n; ++i) {
            const int t = g.node_type[i];
            for (int r = 0; r < d; ++r) {
                activated(r) = gelu(c.htilde(r, i));
            }
            dlayer.a_weight[t].noalias() += dh.col(i) * activated.transpose();
            dlayer.a_bias[t] += dh.col(i);
            dgelu.noalias() = layer.a_weight[t].transpose() * dh.col(i);
            for (int r = 0; r < d; ++r) {
                dhtilde(r, i) = dgelu(r) * gelu_derivative(c.htilde(r, i));
            }
        }

        // attention/message backward, grouped per target node
        Matrix dk = Matrix::Zero(d, n);
        Matrix dq = Matrix::Zero(d, n);
        Matrix dv = Matrix::Zero(d, n);
        std::vector<double> dalpha, dscore;
        for (int i = 0; i < n; ++i) {
            const auto& in = g.in_edges[i];
            if (in.empty()) {
                continue;
            }
            for (int h = 0; h < heads; ++h) {
                const auto ti = dhtilde.col(i).segment(h * p, p);
                dalpha.resize(in.size());
                dscore.resize(in.size());
                double inner = 0.0;
                for (std::size_t j = 0; j < in.size(); ++j) {
                    const int e = in[j];
                    dalpha[j] = ti.dot(c.msg.col(e).segment(h * p, p));
                    inner += c.alpha(h, e) * dalpha[j];
                }
                for (std::size_t j = 0; j < in.size(); ++j) {
                    const int e = in[j];
                    const auto& edge = g.edges[e];
                    const double a = c.alpha(h, e);
                    dscore[j] = a * (dalpha[j] - inner);

                    // message path: msg = W_msg^T v(src)
                    const Vector dmsg = a * ti;
                    const auto vs = c.v.col(edge.src).segment(h * p, p);
                    dlayer.w_msg[edge.type][h].noalias() += vs * dmsg.transpose();
                    dv.col(edge.src).segment(h * p, p).noalias() +=
                        layer.w_msg[edge.type][h] * dmsg;

                    // score path: score = raw * mu / sqrt(p)
                    dlayer.mu[edge.type] += dscore[j] * c.raw(h, e) * inv_sqrt_p;
                    const double cfac = dscore[j] * layer.mu[edge.type] * inv_sqrt_p;
                    const auto ks = c.k.col(edge.src).segment(h * p, p);
                    const auto qs = c.q.col(edge.dst).segment(h * p, p);
                    dk.col(edge.src).segment(h * p, p).noalias() +=
                        cfac * c.wq.col(e).segment(h * p, p);
                    dq.col(edge.dst).segment(h * p, p).noalias() +=
                        cfac * c.wk.col(e).segment(h * p, p);
                    dlayer.w_att[edge.type][h].noalias() += cfac * ks * qs.transpose();
                }
            }
        }

        for (int i = 0; i < n; ++i) {
            const int t = g.node_type[i];
            dlayer.k_proj[t].noalias() += dk.col(i) * c.h_in.col(i).transpose();
            dlayer.q_proj[t].noalias() += dq.col(i) * c.h_in.col(i).transpose();
            dlayer.v_proj[t].noalias() += dv.col(i) * c.h_in.col(i).transpose();
            dh_in.col(i).noalias() += layer.k_proj[t].transpose() * dk.col(i);
            dh_in.col(i).noalias() += layer.q_proj[t].transpose() * dq.col(i);
            dh_in.col(i).noalias() += layer.v_proj[t].transpose() * dv.col(i);
        }
        dh = std::move(dh_in);
    }

    // input embedding
    for (int i = 0; i < n; ++i) {
        const int t = g.node_type[i];
        grads.embed_w[t].noalias() += dh.col(i) * g.node_x[i].transpose();
        grads.embed_b[t] += dh.col(i);
    }
}

} // namespace gsim::learn
