#include "gsim/learn/train.hpp"

#include <cmath>
#include <random>

#include "gsim/util/rng.hpp"

namespace gsim::learn {

double mse_loss(const std::unordered_map<graph::NodeRef, Vector, graph::NodeRefHash>& pred,
                const Batch& batch) {
    double sum = 0.0;
    std::int64_t cells = 0;
    for (const auto& [ref, target] : batch.targets) {
        if (batch.is_masked(ref)) {
            continue;
        }
        auto it = pred.find(ref);
        if (it == pred.end()) {
            throw LearnError("mse_loss: missing prediction for an unmasked target node");
        }
        if (it->second.size() != target.size()) {
            throw LearnError("mse_loss: prediction/target dimension mismatch");
        }
        sum += (it->second - target).squaredNorm();
        cells += target.size();
    }
    if (cells == 0) {
        throw LearnError("mse_loss: empty unmasked target set");
    }
    return sum / static_cast<double>(cells);
}

namespace {

struct FlatView {
    std::vector<double*> data;
    std::vector<int> size;
    int total = 0;

    explicit FlatView(ModelParams& p) {
        for (auto& slot : tensor_slots(p)) {
            data.push_back(slot.data);
            size.push_back(slot.rows * slot.cols);
            total += slot.rows * slot.cols;
        }
    }
};

void set_zero(FlatView& v) {
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        std::fill(v.data[i], v.data[i] + v.size[i], 0.0);
    }
}

} // namespace

TrainResult train(const std::vector<Batch>& dataset, const ModelConfig& config) {
    config.validate();
    if (dataset.empty()) {
        throw LearnError("train: empty dataset");
    }

    std::vector<BoundBatch> bound;
    bound.reserve(dataset.size());
    int n_used_batches = 0;
    for (const auto& batch : dataset) {
        bound.push_back(bind_batch(batch, config));
        if (bound.back().used > 0) {
            ++n_used_batches;
        }
    }
    if (n_used_batches == 0) {
        throw LearnError("train: no batch carries an unmasked target");
    }

    TrainResult result;
    result.params = init_params(config);
    ModelParams grads = zeros_like(result.params);
    ModelParams adam_m = zeros_like(result.params);
    ModelParams adam_v = zeros_like(result.params);
    FlatView theta(result.params);
    FlatView g(grads);
    FlatView m1(adam_m);
    FlatView m2(adam_v);

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double lr = config.learning_rate;
    const double batch_scale = 1.0 / n_used_batches;

    ForwardCache cache;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        set_zero(g);
        double total = 0.0;
        for (auto& bb : bound) {
            if (bb.used == 0) {
                continue;
            }
            const Matrix preds = forward_all(result.params, bb.binding, &cache);
            total += loss_from_preds(preds, bb);
            backward(result.params, bb, cache, batch_scale, grads);
        }
        const double epoch_loss = total * batch_scale;
        if (!std::isfinite(epoch_loss)) {
            throw LearnError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             " (diverged; reduce the learning rate)");
        }
        result.loss_curve.push_back(epoch_loss);

        const double t = epoch + 1.0;
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        for (std::size_t s = 0; s < theta.data.size(); ++s) {
            double* w = theta.data[s];
            double* gw = g.data[s];
            double* mw = m1.data[s];
            double* vw = m2.data[s];
            for (int i = 0; i < theta.size[s]; ++i) {
                mw[i] = beta1 * mw[i] + (1.0 - beta1) * gw[i];
                vw[i] = beta2 * vw[i] + (1.0 - beta2) * gw[i] * gw[i];
                w[i] -= lr * (mw[i] / bc1) / (std::sqrt(vw[i] / bc2) + eps);
            }
        }
    }
    return result;
}

double grad_check(const ModelParams& params, const Batch& batch, int n_probes) {
    if (n_probes < 1) {
        throw LearnError("grad_check: n_probes must be >= 1");
    }
    ModelParams work = params;
    const BoundBatch bb = bind_batch(batch, work.config);

    ForwardCache cache;
    forward_all(work, bb.binding, &cache);
    ModelParams grads = zeros_like(work);
    backward(work, bb, cache, 1.0, grads);

    FlatView theta(work);
    FlatView g(grads);

    std::mt19937_64 rng(util::splitmix64(work.config.seed ^ 0x67726164ULL));
    const double step = 1e-5;
    double max_rel = 0.0;
    for (int probe = 0; probe < n_probes; ++probe) {
        const int slot = static_cast<int>(rng() % theta.data.size());
        if (theta.size[slot] == 0) {
            continue;
        }
        const int idx = static_cast<int>(rng() % theta.size[slot]);
        double* w = &theta.data[slot][idx];
        const double saved = *w;

        *w = saved + step;
        const double up = loss_from_preds(forward_all(work, bb.binding), bb);
        *w = saved - step;
        const double down = loss_from_preds(forward_all(work, bb.binding), bb);
        *w = saved;

        const double numeric = (up - down) / (2.0 * step);
        const double analytic = g.data[slot][idx];
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

} // namespace gsim::learn
