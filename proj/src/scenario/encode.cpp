#include "gsim/scenario/encode.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gsim/util/rng.hpp"

namespace gsim::scenario {

using graph::GraphSnapshot;
using graph::NodeRef;

namespace {

int max_phase_count(const ScenarioSpec& spec) {
    int n = 1;
    for (const auto& sig : spec.signals) {
        n = std::max(n, static_cast<int>(sig.phases.size()));
    }
    return n;
}

struct NetRefs {
    std::unordered_map<std::string, NodeRef> road;
    std::unordered_map<std::string, NodeRef> lane;
    std::unordered_map<std::string, NodeRef> junction;
    std::unordered_map<std::string, NodeRef> signal;
};

/// True when some signal shows red for every connection leaving `lane_id`
/// in the given phase states. Lanes without a gated outgoing connection
/// count as green.
bool lane_green(const ScenarioSpec& spec, const std::string& lane_id,
                const std::vector<oracle::PhaseState>& phases) {
    bool any_controlled = false;
    bool any_green = false;
    for (const auto& conn : spec.network.connections) {
        if (conn.from_lane != lane_id) {
            continue;
        }
        const auto* sig = spec.signal_for_connection(conn.id());
        if (sig == nullptr) {
            any_green = true;
            continue;
        }
        any_controlled = true;
        const std::size_t sig_idx = sig - spec.signals.data();
        if (sig_idx < phases.size() && oracle::is_green(*sig, phases[sig_idx], conn.id())) {
            any_green = true;
        }
    }
    if (!any_controlled) {
        return true;
    }
    return any_green;
}

std::vector<oracle::PhaseState> phases_at(const ScenarioSpec& spec, double t) {
    std::vector<oracle::PhaseState> phases;
    phases.reserve(spec.signals.size());
    for (const auto& sig : spec.signals) {
        phases.push_back(oracle::signal_phase(sig, t));
    }
    return phases;
}

/// Emits the network portion (all non-car nodes and infrastructure edges)
/// into `g` with the dynamic features for the given phase states.
NetRefs emit_network(GraphSnapshot& g, const ScenarioSpec& spec,
                     const std::vector<oracle::PhaseState>& phases) {
    NetRefs refs;
    const auto& net = spec.network;
    const double s_ref = spec.norm.s_ref;
    const double v_ref = spec.norm.v_ref;
    const int phase_dim = max_phase_count(spec);

    for (const auto& road : net.roads) {
        const double feats[2] = {road.length_m / s_ref, static_cast<double>(road.lane_count)};
        refs.road.emplace(road.id, g.add_node("road", feats));
    }
    for (const auto& lane : net.lanes) {
        const double feats[3] = {lane.length_m / s_ref, lane.speed_limit_mps / v_ref,
                                 lane_green(spec, lane.id, phases) ? 1.0 : 0.0};
        refs.lane.emplace(lane.id, g.add_node("lane", feats));
    }
    for (const auto& junction : net.junctions) {
        const double feats[2] = {junction.x / s_ref, junction.y / s_ref};
        refs.junction.emplace(junction.id, g.add_node("junction", feats));
    }
    for (std::size_t i = 0; i < spec.signals.size(); ++i) {
        std::vector<double> one_hot(phase_dim, 0.0);
        const int active = i < phases.size() ? phases[i].index : 0;
        if (active >= 0 && active < phase_dim) {
            one_hot[active] = 1.0;
        }
        refs.signal.emplace(spec.signals[i].id, g.add_node("signal", one_hot));
    }

    for (const auto& lane : net.lanes) {
        g.add_edge(refs.lane.at(lane.id), refs.road.at(lane.road_id), "on_road", {});
    }
    for (const auto& conn : net.connections) {
        std::vector<double> movement(3, 0.0);
        movement[static_cast<int>(conn.movement)] = 1.0;
        g.add_edge(refs.lane.at(conn.from_lane), refs.lane.at(conn.to_lane), "connects_to",
                   movement);
    }
    for (const auto& sig : spec.signals) {
        // one controls edge per distinct gated approach lane
        std::vector<std::string> seen;
        for (const auto& conn_id : sig.controlled_connections()) {
            const auto cut = conn_id.find('>');
            const std::string from_lane = conn_id.substr(0, cut);
            if (std::find(seen.begin(), seen.end(), from_lane) != seen.end()) {
                continue;
            }
            seen.push_back(from_lane);
            g.add_edge(refs.signal.at(sig.id), refs.lane.at(from_lane), "controls", {});
        }
    }
    return refs;
}

} // namespace

std::shared_ptr<const graph::Schema> build_traffic_schema(const ScenarioSpec& spec) {
    std::vector<graph::NodeTypeDef> node_types = {
        {"car", 4}, {"lane", 3}, {"road", 2}, {"junction", 2}, {"signal", max_phase_count(spec)},
    };
    std::vector<graph::EdgeTypeDef> edge_types = {
        {"follows", "car", "car", 2},   {"leads", "car", "car", 2},
        {"on_lane", "car", "lane", 1},  {"hosts", "lane", "car", 1},
        {"on_road", "lane", "road", 0}, {"connects_to", "lane", "lane", 3},
        {"controls", "signal", "lane", 0},
    };
    return std::make_shared<const graph::Schema>(std::move(node_types), std::move(edge_types));
}

GraphSnapshot build_network_graph(const ScenarioSpec& spec) {
    GraphSnapshot g(build_traffic_schema(spec), 0);
    emit_network(g, spec, phases_at(spec, 0.0));
    g.seal();
    return g;
}

EncodedWorld world_to_graph(const sim::WorldState& world, const GraphSnapshot& net,
                            const ScenarioSpec& spec) {
    const auto schema = build_traffic_schema(spec);
    if (!(net.schema() == *schema)) {
        throw ScenarioError("world_to_graph: network snapshot schema does not match the scenario");
    }
    GraphSnapshot g(schema, world.step);
    auto phases = world.phases;
    if (phases.empty() && !spec.signals.empty()) {
        phases = phases_at(spec, static_cast<double>(world.step) * spec.dt_s);
    }
    const NetRefs refs = emit_network(g, spec, phases);
    if (g.node_count() != net.node_count()) {
        throw ScenarioError("world_to_graph: network snapshot does not match the scenario");
    }

    const double v_ref = spec.norm.v_ref;
    const double s_ref = spec.norm.s_ref;

    EncodedWorld out{std::move(g), {}};
    // vehicles are kept ordered by id; insertion order is therefore stable
    for (const auto& veh : world.vehicles) {
        if (veh.lane < 0 || veh.lane >= static_cast<int>(spec.network.lanes.size())) {
            throw ScenarioError("world_to_graph: vehicle " + std::to_string(veh.id) +
                                " on unknown lane");
        }
        const auto& lane = spec.network.lane(veh.lane);
        double remaining_frac = 0.0;
        if (veh.route >= 0) {
            const double total = route_length_m(spec, veh.route);
            const auto& route = spec.demand.routes[veh.route];
            double covered = veh.offset_m;
            for (int i = 0; i < veh.route_pos && i < static_cast<int>(route.lanes.size()); ++i) {
                covered += spec.network.lane(spec.network.lane_index(route.lanes[i])).length_m;
            }
            remaining_frac = total > 0 ? std::clamp(1.0 - covered / total, 0.0, 1.0) : 0.0;
        }
        const double feats[4] = {veh.speed_mps / v_ref, veh.accel_mps2 / v_ref,
                                 veh.offset_m / lane.length_m, remaining_frac};
        const NodeRef car = out.graph.add_node("car", feats);
        out.car_node.emplace(veh.id, car);
        const NodeRef lane_node = refs.lane.at(lane.id);
        const double offset_frac[1] = {veh.offset_m / lane.length_m};
        out.graph.add_edge(car, lane_node, "on_lane", offset_frac);
        out.graph.add_edge(lane_node, car, "hosts", offset_frac);
    }

    // follower -> leader chains per lane, front-most pair first
    for (int lane_idx = 0; lane_idx < static_cast<int>(spec.network.lanes.size()); ++lane_idx) {
        std::vector<const sim::VehicleState*> on_lane;
        for (const auto& veh : world.vehicles) {
            if (veh.lane == lane_idx) {
                on_lane.push_back(&veh);
            }
        }
        std::sort(on_lane.begin(), on_lane.end(),
                  [](const auto* a, const auto* b) { return a->offset_m > b->offset_m; });
        for (std::size_t i = 0; i + 1 < on_lane.size(); ++i) {
            const auto* leader = on_lane[i];
            const auto* follower = on_lane[i + 1];
            const double gap = leader->offset_m - follower->offset_m - leader->length_m;
            const double dv = follower->speed_mps - leader->speed_mps;
            const double feats[2] = {gap / s_ref, dv / v_ref};
            out.graph.add_edge(out.car_node.at(follower->id), out.car_node.at(leader->id),
                               "follows", feats);
            out.graph.add_edge(out.car_node.at(leader->id), out.car_node.at(follower->id),
                               "leads", feats);
        }
    }

    out.graph.seal();
    return out;
}

std::vector<SpawnedDeparture> spawn_departures(const DemandSpec& demand, std::uint64_t seed) {
    std::vector<SpawnedDeparture> out;
    if (demand.count == 0) {
        return out;
    }
    double total_weight = 0.0;
    for (const auto& r : demand.routes) {
        total_weight += r.weight;
    }
    if (demand.routes.empty() || !(total_weight > 0)) {
        throw ScenarioError("spawn_departures: no routes with positive weight");
    }

    std::mt19937_64 rng(seed);
    auto draw_route = [&](const std::string& origin_lane) {
        double scale = total_weight;
        if (!origin_lane.empty()) {
            scale = 0.0;
            for (const auto& r : demand.routes) {
                if (!r.lanes.empty() && r.lanes.front() == origin_lane) {
                    scale += r.weight;
                }
            }
            if (!(scale > 0)) {
                throw ScenarioError("spawn_departures: no route starts at lane '" + origin_lane +
                                    "'");
            }
        }
        const double u = util::next_u01(rng) * scale;
        double acc = 0.0;
        for (int i = 0; i < static_cast<int>(demand.routes.size()); ++i) {
            const auto& r = demand.routes[i];
            if (!origin_lane.empty() && (r.lanes.empty() || r.lanes.front() != origin_lane)) {
                continue;
            }
            acc += r.weight;
            if (u < acc) {
                return i;
            }
        }
        return static_cast<int>(demand.routes.size()) - 1;
    };

    for (int k = 0; k < demand.count; ++k) {
        SpawnedDeparture d;
        d.vehicle_id = k;
        if (!demand.schedule.empty()) {
            d.step = demand.schedule[k].step;
            d.route = draw_route(demand.schedule[k].origin_lane);
        } else {
            d.step = demand.flow_start_step +
                     static_cast<int>(std::floor(k / demand.flow_rate_per_step));
            d.route = draw_route("");
        }
        out.push_back(d);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.step != b.step ? a.step < b.step : a.vehicle_id < b.vehicle_id;
    });
    return out;
}

double route_length_m(const ScenarioSpec& spec, int route_index) {
    const auto& route = spec.demand.routes.at(route_index);
    double total = 0.0;
    for (const auto& lane_id : route.lanes) {
        total += spec.network.lane(spec.network.lane_index(lane_id)).length_m;
    }
    return total;
}

} // namespace gsim::scenario
