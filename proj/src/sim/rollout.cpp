#include "gsim/sim/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "gsim/learn/hgt.hpp"
#include "gsim/util/rng.hpp"

namespace gsim::sim {

using scenario::ScenarioSpec;

namespace {

constexpr double kLookaheadHorizonM = 200.0;  // leader search across junctions
constexpr double kMinClampGap = 0.1;          // learned-backend collision floor

/// Per-lane vehicle indices sorted front (largest offset) first.
using LaneOrder = std::vector<std::vector<int>>;

LaneOrder build_lane_order(const WorldState& world, const ScenarioSpec& spec) {
    LaneOrder order(spec.network.lanes.size());
    for (int i = 0; i < static_cast<int>(world.vehicles.size()); ++i) {
        order[world.vehicles[i].lane].push_back(i);
    }
    for (auto& lane : order) {
        std::stable_sort(lane.begin(), lane.end(), [&](int a, int b) {
            return world.vehicles[a].offset_m > world.vehicles[b].offset_m;
        });
    }
    return order;
}

/// The route lane following `lane_pos` for a vehicle, or -1 at route end.
int next_route_lane(const ScenarioSpec& spec, const VehicleState& v, int route_pos) {
    if (v.route < 0) {
        return -1;
    }
    const auto& lanes = spec.demand.routes[v.route].lanes;
    if (route_pos + 1 >= static_cast<int>(lanes.size())) {
        return -1;
    }
    return spec.network.lane_index(lanes[route_pos + 1]);
}

/// Whether the connection from the vehicle's current lane to its next route
/// lane shows green in the given phase states. Route-final lanes are free.
bool connection_is_green(const ScenarioSpec& spec, const WorldState& world,
                         const VehicleState& v, int route_pos) {
    const int next_lane = next_route_lane(spec, v, route_pos);
    if (next_lane < 0) {
        return true;
    }
    const std::string conn_id =
        spec.network.lane(v.lane).id + ">" + spec.network.lane(next_lane).id;
    const auto* sig = spec.signal_for_connection(conn_id);
    if (sig == nullptr) {
        return true;
    }
    const std::size_t sig_idx = sig - spec.signals.data();
    if (sig_idx >= world.phases.size()) {
        return true;
    }
    return oracle::is_green(*sig, world.phases[sig_idx], conn_id);
}

LeaderInfo resolve_with_order(const WorldState& world, const VehicleState& v,
                              const ScenarioSpec& spec, const LaneOrder& order) {
    if (v.lane < 0 || v.lane >= static_cast<int>(spec.network.lanes.size())) {
        throw SimError("resolve_leader: vehicle " + std::to_string(v.id) + " on unknown lane");
    }

    // nearest same-lane vehicle ahead
    const auto& on_lane = order[v.lane];
    const VehicleState* ahead = nullptr;
    for (auto it = on_lane.rbegin(); it != on_lane.rend(); ++it) {
        const auto& other = world.vehicles[*it];
        if (other.id == v.id) {
            continue;
        }
        if (other.offset_m > v.offset_m ||
            (other.offset_m == v.offset_m && other.id < v.id)) {
            ahead = &other;
            break;
        }
    }
    if (ahead != nullptr) {
        return LeaderInfo{ahead->offset_m - v.offset_m - ahead->length_m, ahead->speed_mps,
                          ahead->id, false};
    }

    // red signal: virtual stopped leader at the stop line
    const auto& lane = spec.network.lane(v.lane);
    if (!connection_is_green(spec, world, v, v.route_pos)) {
        const double stop_line = lane.length_m - spec.network.stop_line_offset_m;
        return LeaderInfo{stop_line - v.offset_m, 0.0, std::nullopt, true};
    }

    // green: look across onto the following route lanes within braking range
    double carried = lane.length_m - v.offset_m;
    int pos = v.route_pos;
    int lane_idx = v.lane;
    while (carried < kLookaheadHorizonM) {
        VehicleState probe = v;
        probe.lane = lane_idx;
        if (!connection_is_green(spec, world, probe, pos)) {
            break;  // a red further ahead walls off anything beyond it
        }
        const int next_lane = next_route_lane(spec, probe, pos);
        if (next_lane < 0) {
            break;
        }
        const auto& downstream = order[next_lane];
        if (!downstream.empty()) {
            const auto& last = world.vehicles[downstream.back()];
            return LeaderInfo{carried + last.offset_m - last.length_m, last.speed_mps, last.id,
                              false};
        }
        carried += spec.network.lane(next_lane).length_m;
        lane_idx = next_lane;
        ++pos;
    }
    return LeaderInfo{kGapSentinel, spec.max_speed_mps(), std::nullopt, false};
}

double backend_next_speed(const VehicleState& v, const LeaderInfo& leader, Backend backend,
                          const ScenarioSpec& spec, double dt, std::uint64_t seed,
                          std::int64_t step_index, double hold_speed) {
    const double limit = spec.network.lane(v.lane).speed_limit_mps;
    switch (backend) {
        case Backend::idm: {
            if (leader.virtual_leader && leader.gap_m <= 0) {
                return 0.0;  // crept onto the stop line on red: hold
            }
            const double accel =
                oracle::idm_accel(v.speed_mps, v.speed_mps - leader.leader_speed_mps,
                                  leader.gap_m, spec.idm);
            return std::clamp(v.speed_mps + accel * dt, 0.0, limit);
        }
        case Backend::krauss: {
            const double noise = util::u01(util::mix3(
                seed, static_cast<std::uint64_t>(step_index), static_cast<std::uint64_t>(v.id)));
            const double next = oracle::krauss_next_speed(v.speed_mps, leader.leader_speed_mps,
                                                          leader.gap_m, spec.krauss, dt, noise);
            return std::min(next, limit);
        }
        case Backend::learned: {
            const double target = hold_speed >= 0 ? hold_speed : v.speed_mps;
            return std::clamp(target, 0.0, limit);
        }
    }
    return 0.0;
}

} // namespace

LeaderInfo resolve_leader(const WorldState& world, const VehicleState& v,
                          const ScenarioSpec& spec) {
    return resolve_with_order(world, v, spec, build_lane_order(world, spec));
}

ModelSpeedPredictor::ModelSpeedPredictor(std::shared_ptr<const learn::ModelParams> params)
    : params_(std::move(params)) {
    if (!params_) {
        throw SimError("learned backend requires model parameters");
    }
}

std::unordered_map<int, double>
ModelSpeedPredictor::predict(const scenario::EncodedWorld& enc) const {
    const auto raw = learn::model_forward(*params_, enc.graph);
    std::unordered_map<int, double> out;
    out.reserve(enc.car_node.size());
    for (const auto& [vehicle_id, node] : enc.car_node) {
        auto it = raw.find(node);
        if (it == raw.end() || it->second.size() < 1) {
            throw SimError("learned backend: missing prediction for vehicle " +
                           std::to_string(vehicle_id));
        }
        out.emplace(vehicle_id, it->second[0]);
    }
    return out;
}

WorldState initial_world(const ScenarioSpec& spec, const RolloutConfig& cfg) {
    cfg.validate();
    WorldState world;
    world.step = 0;
    for (const auto& d : scenario::spawn_departures(spec.demand, cfg.seed)) {
        world.pending.push_back({d.step, d.vehicle_id, d.route});
    }
    for (const auto& sig : spec.signals) {
        world.phases.push_back(oracle::signal_phase(sig, 0.0));
    }
    return world;
}

WorldState step(const WorldState& world, const RolloutConfig& cfg, const ScenarioSpec& spec,
                const SpeedPredictor* predictor, StepStats* stats) {
    cfg.validate();
    const double dt = cfg.dt_s > 0 ? cfg.dt_s : spec.dt_s;
    const LaneOrder order = build_lane_order(world, spec);
    const int n = static_cast<int>(world.vehicles.size());

    // learned backend: refresh the zero-order holds every dci steps
    std::unordered_map<int, double> fresh_holds;
    const bool refresh =
        cfg.backend == Backend::learned && (world.step % cfg.dci == 0) && n > 0;
    if (cfg.backend == Backend::learned && predictor == nullptr) {
        throw SimError("step: learned backend without a predictor");
    }
    if (refresh) {
        const auto net = scenario::build_network_graph(spec);
        const auto enc = scenario::world_to_graph(world, net, spec);
        for (const auto& [vehicle_id, norm_speed] : predictor->predict(enc)) {
            fresh_holds.emplace(vehicle_id, norm_speed * spec.norm.v_ref);
        }
    }

    WorldState next = world;
    next.step = world.step + 1;

    // next speeds and tentative moves from the previous state only
    std::vector<double> v_next(n), move(n);
    for (int i = 0; i < n; ++i) {
        const auto& veh = world.vehicles[i];
        const LeaderInfo leader = resolve_with_order(world, veh, spec, order);
        double hold = veh.hold_speed_mps;
        if (auto it = fresh_holds.find(veh.id); it != fresh_holds.end()) {
            hold = it->second;
        }
        v_next[i] = backend_next_speed(veh, leader, cfg.backend, spec, dt, cfg.seed, world.step,
                                       hold);
        move[i] = 0.5 * (veh.speed_mps + v_next[i]) * dt;
        next.vehicles[i].hold_speed_mps = cfg.backend == Backend::learned ? hold : -1.0;
    }

    // learned backend: clamp followers so no move ends closer than 0.1 m to
    // its leader's rear, front-to-back per lane (positions along the old lane)
    if (cfg.backend == Backend::learned) {
        for (const auto& lane : order) {
            for (std::size_t j = 1; j < lane.size(); ++j) {
                const int lead = lane[j - 1];
                const int folw = lane[j];
                const double lead_end =
                    world.vehicles[lead].offset_m + move[lead] - world.vehicles[lead].length_m;
                const double max_end = lead_end - kMinClampGap;
                if (world.vehicles[folw].offset_m + move[folw] > max_end) {
                    const double allowed =
                        std::max(0.0, max_end - world.vehicles[folw].offset_m);
                    move[folw] = allowed;
                    v_next[folw] = std::clamp(2.0 * allowed / dt - world.vehicles[folw].speed_mps,
                                              0.0, v_next[folw]);
                    if (stats != nullptr) {
                        ++stats->violations;
                    }
                }
            }
        }
    }

    // commit moves, lane transitions, exits
    std::vector<VehicleState> survivors;
    survivors.reserve(n);
    for (int i = 0; i < n; ++i) {
        VehicleState veh = next.vehicles[i];
        veh.accel_mps2 = (v_next[i] - veh.speed_mps) / dt;
        veh.speed_mps = v_next[i];
        veh.offset_m += move[i];
        bool exited = false;
        while (veh.offset_m > spec.network.lane(veh.lane).length_m) {
            const int next_lane = next_route_lane(spec, veh, veh.route_pos);
            if (next_lane < 0) {
                exited = true;
                break;
            }
            veh.offset_m -= spec.network.lane(veh.lane).length_m;
            veh.lane = next_lane;
            ++veh.route_pos;
        }
        if (exited) {
            ++next.exited;
        } else {
            survivors.push_back(std::move(veh));
        }
    }
    next.vehicles = std::move(survivors);

    // learned backend: repair any post-transition overlap on the new lanes
    if (cfg.backend == Backend::learned) {
        LaneOrder committed(spec.network.lanes.size());
        for (int i = 0; i < static_cast<int>(next.vehicles.size()); ++i) {
            committed[next.vehicles[i].lane].push_back(i);
        }
        for (auto& lane : committed) {
            std::stable_sort(lane.begin(), lane.end(), [&](int a, int b) {
                return next.vehicles[a].offset_m > next.vehicles[b].offset_m;
            });
            for (std::size_t j = 1; j < lane.size(); ++j) {
                auto& lead = next.vehicles[lane[j - 1]];
                auto& folw = next.vehicles[lane[j]];
                const double max_front = lead.offset_m - lead.length_m - kMinClampGap;
                if (folw.offset_m > max_front) {
                    folw.offset_m = std::max(0.0, max_front);
                    folw.speed_mps = std::min(folw.speed_mps, lead.speed_mps);
                    if (stats != nullptr) {
                        ++stats->violations;
                    }
                }
            }
        }
    }

    // departures whose step has arrived enter at offset 0 when the entry gap
    // allows; blocked ones stay pending and retry next step
    std::vector<PendingDeparture> still_pending;
    still_pending.reserve(next.pending.size());
    std::vector<double> lane_rear(spec.network.lanes.size(),
                                  std::numeric_limits<double>::infinity());
    for (const auto& veh : next.vehicles) {
        lane_rear[veh.lane] = std::min(lane_rear[veh.lane], veh.offset_m - veh.length_m);
    }
    for (const auto& dep : next.pending) {
        if (dep.step > next.step) {
            still_pending.push_back(dep);
            continue;
        }
        const auto& route = spec.demand.routes.at(dep.route);
        const int lane_idx = spec.network.lane_index(route.lanes.front());
        if (lane_rear[lane_idx] >= spec.idm.s0) {
            VehicleState veh;
            veh.id = dep.vehicle_id;
            veh.lane = lane_idx;
            veh.offset_m = 0.0;
            veh.speed_mps = 0.0;
            veh.accel_mps2 = 0.0;
            veh.route = dep.route;
            veh.route_pos = 0;
            veh.length_m = spec.network.vehicle_length_m;
            next.vehicles.push_back(std::move(veh));
            lane_rear[lane_idx] = -spec.network.vehicle_length_m;
            ++next.entered;
        } else {
            still_pending.push_back(dep);
        }
    }
    next.pending = std::move(still_pending);

    std::sort(next.vehicles.begin(), next.vehicles.end(),
              [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });

    // advance signal phases to the new step's time
    const double t = static_cast<double>(next.step) * dt;
    next.phases.clear();
    for (const auto& sig : spec.signals) {
        next.phases.push_back(oracle::signal_phase(sig, t));
    }

    return next;
}

TrajectoryLog run_with_observer(const ScenarioSpec& spec, const RolloutConfig& cfg,
                                const SpeedPredictor* predictor,
                                const std::function<void(const WorldState&)>& observe) {
    cfg.validate();
    const double dt = cfg.dt_s > 0 ? cfg.dt_s : spec.dt_s;
    TrajectoryLog log;
    StepStats stats;
    WorldState world = initial_world(spec, cfg);
    if (observe) {
        observe(world);
    }
    for (std::int64_t s = 0; s < cfg.horizon; ++s) {
        world = step(world, cfg, spec, predictor, &stats);
        if (observe) {
            observe(world);
        }
        const LaneOrder order = build_lane_order(world, spec);
        for (const auto& veh : world.vehicles) {
            const LeaderInfo leader = resolve_with_order(world, veh, spec, order);
            TrajectoryRow row;
            row.step = world.step;
            row.time_s = static_cast<double>(world.step) * dt;
            row.vehicle_id = veh.id;
            row.lane_id = spec.network.lane(veh.lane).id;
            row.offset_m = veh.offset_m;
            row.speed_mps = veh.speed_mps;
            row.accel_mps2 = veh.accel_mps2;
            row.leader_id = leader.leader_id;
            row.gap_m = leader.leader_id || leader.virtual_leader ? leader.gap_m : kGapSentinel;
            log.rows.push_back(std::move(row));
        }
    }
    log.violation_count = stats.violations;
    return log;
}

TrajectoryLog run(const ScenarioSpec& spec, const RolloutConfig& cfg,
                  const SpeedPredictor* predictor) {
    return run_with_observer(spec, cfg, predictor, nullptr);
}

std::vector<learn::Batch> collect_dataset(const ScenarioSpec& spec, const RolloutConfig& cfg) {
    cfg.validate();
    if (cfg.backend == Backend::learned) {
        throw SimError("collect_dataset: backend must be an oracle");
    }
    if (cfg.horizon < cfg.dci) {
        throw SimError("collect_dataset: horizon shorter than the collection interval");
    }

    const auto net = scenario::build_network_graph(spec);
    const double v_ref = spec.norm.v_ref;

    std::vector<learn::Batch> dataset;
    std::optional<scenario::EncodedWorld> open;  // snapshot awaiting targets

    run_with_observer(spec, cfg, nullptr, [&](const WorldState& world) {
        if (world.step % cfg.dci != 0) {
            return;
        }
        if (open) {
            learn::Batch batch{std::move(open->graph), {}, {}};
            std::unordered_map<int, double> now_speed;
            for (const auto& veh : world.vehicles) {
                now_speed.emplace(veh.id, veh.speed_mps);
            }
            for (const auto& [vehicle_id, node] : open->car_node) {
                auto it = now_speed.find(vehicle_id);
                if (it == now_speed.end()) {
                    batch.targets.emplace_back(node, learn::Vector::Zero(1));
                    batch.mask.push_back(node);
                } else {
                    batch.targets.emplace_back(node,
                                               learn::Vector::Constant(1, it->second / v_ref));
                }
            }
            std::sort(batch.targets.begin(), batch.targets.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::sort(batch.mask.begin(), batch.mask.end());
            dataset.push_back(std::move(batch));
            open.reset();
        }
        if (world.step + cfg.dci <= cfg.horizon) {
            open = scenario::world_to_graph(world, net, spec);
        }
    });
    return dataset;
}

} // namespace gsim::sim
