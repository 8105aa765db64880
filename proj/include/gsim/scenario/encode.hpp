#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "gsim/graph/snapshot.hpp"
#include "gsim/scenario/scenario.hpp"
#include "gsim/sim/world.hpp"

namespace gsim::scenario {

/// Node and edge kinds used by the traffic graph encoding.
///
/// Node features:
///   car      [speed/v_ref, accel/v_ref, offset/lane_length, remaining route fraction]
///   lane     [length/s_ref, speed_limit/v_ref, green_now]
///   road     [length/s_ref, lane_count]
///   junction [x/s_ref, y/s_ref]
///   signal   [one-hot of the active phase, padded to the widest program]
///
/// Directed relations. Each semantic relation between cars (and between a
/// lane and its cars) is stored in both directions under distinct kinds, so
/// neighborhood aggregation can route information either way:
///   follows      car -> car   (follower to its leader)   [gap/s_ref, dv/v_ref]
///   leads        car -> car   (leader to its follower)   [gap/s_ref, dv/v_ref]
///   on_lane      car -> lane  [offset/lane_length]
///   hosts        lane -> car  [offset/lane_length]
///   on_road      lane -> road
///   connects_to  lane -> lane [movement one-hot]
///   controls     signal -> lane (approach lanes of controlled connections)
///
/// dv is follower speed minus leader speed; gap is leader rear minus
/// follower front.
std::shared_ptr<const graph::Schema> build_traffic_schema(const ScenarioSpec& spec);

/// Sealed snapshot of the static network at timestamp 0: one node per
/// road/lane/junction/signal and the infrastructure edges. No car nodes.
/// Signal features and lane green flags reflect the phase at t = 0.
graph::GraphSnapshot build_network_graph(const ScenarioSpec& spec);

struct EncodedWorld {
    graph::GraphSnapshot graph;
    std::unordered_map<int, graph::NodeRef> car_node;  ///< vehicle id -> node
};

/// Encodes a world state on top of the network content as a sealed snapshot
/// at the world's step index. `net` must be the snapshot produced by
/// build_network_graph for the same spec (used for consistency checks).
EncodedWorld world_to_graph(const sim::WorldState& world, const graph::GraphSnapshot& net,
                            const ScenarioSpec& spec);

struct SpawnedDeparture {
    int step = 0;
    int vehicle_id = 0;
    int route = 0;
};

/// Expands demand into a per-vehicle departure list, routes drawn by weight.
/// Deterministic for a fixed seed; sorted by (step, vehicle id).
std::vector<SpawnedDeparture> spawn_departures(const DemandSpec& demand, std::uint64_t seed);

/// Total length of a route in metres.
double route_length_m(const ScenarioSpec& spec, int route_index);

} // namespace gsim::scenario
