#pragma once

#include "gsim/learn/hgt.hpp"

namespace gsim::learn {

/// Mean squared error between predictions and the batch's unmasked targets.
/// Every unmasked target node must have a prediction.
double mse_loss(const std::unordered_map<graph::NodeRef, Vector, graph::NodeRefHash>& pred,
                const Batch& batch);

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_curve;  ///< one entry per epoch (pre-update loss)
};

/// Full-batch Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) from seeded
/// uniform initialization. The epoch gradient is the mean over batches that
/// carry at least one unmasked target; batches without any are skipped.
/// Deterministic per config.seed.
TrainResult train(const std::vector<Batch>& dataset, const ModelConfig& config);

/// Compares analytic gradients against central finite differences
/// (step 1e-5) at n_probes randomly chosen scalar parameters; returns the
/// maximum relative error max(|a - n|) / max(|a|, |n|, 1e-8).
double grad_check(const ModelParams& params, const Batch& batch, int n_probes);

} // namespace gsim::learn
