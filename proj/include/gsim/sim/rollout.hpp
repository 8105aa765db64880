#pragma once

#include <functional>
#include <memory>
#include <unordered_map>

#include "gsim/learn/model.hpp"
#include "gsim/scenario/encode.hpp"
#include "gsim/sim/world.hpp"

namespace gsim::sim {

/// Result of leader resolution for one vehicle.
struct LeaderInfo {
    double gap_m = kGapSentinel;     ///< to the leader's rear (or stop line)
    double leader_speed_mps = 0.0;
    std::optional<int> leader_id;    ///< empty for virtual stop-line leader or none
    bool virtual_leader = false;     ///< red signal stop line
};

/**
 * Nearest constraint ahead of `v`: the closest same-lane vehicle in front;
 * otherwise, if the vehicle's next connection is red, a virtual stopped
 * leader at the stop line; otherwise the nearest vehicle on the next route
 * lanes within braking range; otherwise free road (gap sentinel, leader
 * speed = the scenario's maximum speed).
 */
LeaderInfo resolve_leader(const WorldState& world, const VehicleState& v,
                          const scenario::ScenarioSpec& spec);

/// Normalized next-speed source for the learned backend.
class SpeedPredictor {
public:
    virtual ~SpeedPredictor() = default;
    /// Normalized next speed (speed / v_ref) keyed by vehicle id.
    virtual std::unordered_map<int, double> predict(const scenario::EncodedWorld& enc) const = 0;
};

/// Predictor backed by a trained model's forward pass.
class ModelSpeedPredictor : public SpeedPredictor {
public:
    explicit ModelSpeedPredictor(std::shared_ptr<const learn::ModelParams> params);
    std::unordered_map<int, double> predict(const scenario::EncodedWorld& enc) const override;

private:
    std::shared_ptr<const learn::ModelParams> params_;
};

struct StepStats {
    std::int64_t violations = 0;  ///< learned-backend collision clamps
};

/**
 * One transition of the world. Pure in its inputs: identical
 * (world, cfg, spec, predictor) produce identical outputs. Oracle backends
 * must stay collision-free; a collision caused by the learned backend is
 * clamped to a 0.1 m gap and counted in `stats`.
 */
WorldState step(const WorldState& world, const RolloutConfig& cfg,
                const scenario::ScenarioSpec& spec, const SpeedPredictor* predictor = nullptr,
                StepStats* stats = nullptr);

/// Initial world: step 0, no vehicles, departures spawned from the demand.
WorldState initial_world(const scenario::ScenarioSpec& spec, const RolloutConfig& cfg);

/// Full rollout from an empty world; log rows for steps 1..horizon.
TrajectoryLog run(const scenario::ScenarioSpec& spec, const RolloutConfig& cfg,
                  const SpeedPredictor* predictor = nullptr);

/// Like run, also invoking `observe` on every post-step world (and on the
/// initial world). Used by dataset collection and invariant scanners.
TrajectoryLog run_with_observer(const scenario::ScenarioSpec& spec, const RolloutConfig& cfg,
                                const SpeedPredictor* predictor,
                                const std::function<void(const WorldState&)>& observe);

/**
 * Oracle rollout sampled every cfg.dci steps: pairs the encoded snapshot at
 * step k*dci with per-car normalized speeds at step (k+1)*dci, masking
 * vehicles that exited in between. k = 0 .. floor((horizon - dci)/dci).
 */
std::vector<learn::Batch> collect_dataset(const scenario::ScenarioSpec& spec,
                                          const RolloutConfig& cfg);

} // namespace gsim::sim
