#include "gsim/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gsim::scenario {

using nlohmann::json;

std::string movement_name(Movement m) {
    switch (m) {
        case Movement::straight: return "straight";
        case Movement::left: return "left";
        case Movement::right: return "right";
    }
    return "straight";
}

Movement movement_from_name(const std::string& name) {
    if (name == "straight") return Movement::straight;
    if (name == "left") return Movement::left;
    if (name == "right") return Movement::right;
    throw ScenarioError("unknown movement '" + name + "'");
}

int NetworkSpec::lane_index(const std::string& lane_id) const {
    if (lane_lookup_.empty() && !lanes.empty()) {
        for (int i = 0; i < static_cast<int>(lanes.size()); ++i) {
            lane_lookup_.emplace(lanes[i].id, i);
        }
    }
    auto it = lane_lookup_.find(lane_id);
    return it == lane_lookup_.end() ? -1 : it->second;
}

const ConnectionDef* NetworkSpec::find_connection(const std::string& from_lane,
                                                  const std::string& to_lane) const {
    for (const auto& c : connections) {
        if (c.from_lane == from_lane && c.to_lane == to_lane) {
            return &c;
        }
    }
    return nullptr;
}

const oracle::SignalProgram*
ScenarioSpec::signal_for_connection(const std::string& connection_id) const {
    for (const auto& sig : signals) {
        const auto controlled = sig.controlled_connections();
        if (std::binary_search(controlled.begin(), controlled.end(), connection_id)) {
            return &sig;
        }
    }
    return nullptr;
}

double ScenarioSpec::max_speed_mps() const {
    double vmax = krauss.v_max;
    for (const auto& lane : network.lanes) {
        vmax = std::max(vmax, lane.speed_limit_mps);
    }
    return vmax;
}

namespace {

class Violations {
public:
    void add(std::string msg) { messages_.push_back(std::move(msg)); }
    bool empty() const { return messages_.empty(); }
    std::string joined() const {
        std::ostringstream out;
        out << "scenario invalid (" << messages_.size() << " violation"
            << (messages_.size() == 1 ? "" : "s") << "):";
        for (const auto& m : messages_) {
            out << "\n  - " << m;
        }
        return out.str();
    }

private:
    std::vector<std::string> messages_;
};

NetworkSpec parse_network(const json& net, Violations& bad) {
    NetworkSpec network;
    network.stop_line_offset_m = net.value("stop_line_offset_m", 1.0);
    network.vehicle_length_m = net.value("vehicle_length_m", 5.0);
    const double default_limit = net.value("speed_limit_mps", 15.0);
    if (network.vehicle_length_m <= 0) {
        bad.add("vehicle_length_m must be > 0");
    }
    if (network.stop_line_offset_m < 0) {
        bad.add("stop_line_offset_m must be >= 0");
    }

    std::set<std::string> junction_ids;
    for (const auto& j : net.value("junctions", json::array())) {
        JunctionDef def{j.at("id").get<std::string>(), j.value("x", 0.0), j.value("y", 0.0)};
        if (!junction_ids.insert(def.id).second) {
            bad.add("duplicate junction id '" + def.id + "'");
        }
        network.junctions.push_back(std::move(def));
    }

    std::set<std::string> road_ids;
    for (const auto& r : net.value("roads", json::array())) {
        RoadDef road;
        road.id = r.at("id").get<std::string>();
        road.from_junction = r.value("from", "");
        road.to_junction = r.value("to", "");
        road.length_m = r.at("length_m").get<double>();
        road.lane_count = r.value("lanes", 1);
        if (!road_ids.insert(road.id).second) {
            bad.add("duplicate road id '" + road.id + "'");
        }
        if (!(road.length_m > 0)) {
            bad.add("road '" + road.id + "' has non-positive length");
        }
        if (road.lane_count < 1) {
            bad.add("road '" + road.id + "' has no lanes");
        }
        if (!road.from_junction.empty() && junction_ids.count(road.from_junction) == 0) {
            bad.add("road '" + road.id + "' references unknown junction '" + road.from_junction + "'");
        }
        if (!road.to_junction.empty() && junction_ids.count(road.to_junction) == 0) {
            bad.add("road '" + road.id + "' references unknown junction '" + road.to_junction + "'");
        }
        const double limit = r.value("speed_limit_mps", default_limit);
        if (!(limit > 0)) {
            bad.add("road '" + road.id + "' has non-positive speed limit");
        }
        for (int i = 0; i < std::max(road.lane_count, 1); ++i) {
            LaneDef lane;
            lane.id = road.id + "_" + std::to_string(i);
            lane.road_id = road.id;
            lane.index = i;
            lane.length_m = road.length_m;
            lane.speed_limit_mps = limit;
            network.lanes.push_back(std::move(lane));
        }
        network.roads.push_back(std::move(road));
    }

    for (const auto& c : net.value("connections", json::array())) {
        ConnectionDef conn;
        conn.from_lane = c.at("from").get<std::string>();
        conn.to_lane = c.at("to").get<std::string>();
        try {
            conn.movement = movement_from_name(c.value("movement", "straight"));
        } catch (const ScenarioError& e) {
            bad.add(e.what());
        }
        if (network.lane_index(conn.from_lane) < 0) {
            bad.add("connection references unknown lane '" + conn.from_lane + "'");
        }
        if (network.lane_index(conn.to_lane) < 0) {
            bad.add("connection references unknown lane '" + conn.to_lane + "'");
        }
        network.connections.push_back(std::move(conn));
    }
    return network;
}

DemandSpec parse_demand(const json& dem, const NetworkSpec& network, Violations& bad) {
    DemandSpec demand;
    demand.count = dem.value("count", 0);
    if (demand.count < 0) {
        bad.add("demand count must be >= 0");
    }
    for (const auto& r : dem.value("routes", json::array())) {
        RouteDef route;
        route.weight = r.value("weight", 1.0);
        for (const auto& lane : r.at("lanes")) {
            route.lanes.push_back(lane.get<std::string>());
        }
        if (route.lanes.empty()) {
            bad.add("route with empty lane sequence");
        }
        if (route.weight < 0) {
            bad.add("route weight must be >= 0");
        }
        for (const auto& lane_id : route.lanes) {
            if (network.lane_index(lane_id) < 0) {
                bad.add("route references unknown lane '" + lane_id + "'");
            }
        }
        for (std::size_t i = 0; i + 1 < route.lanes.size(); ++i) {
            if (network.lane_index(route.lanes[i]) >= 0 &&
                network.lane_index(route.lanes[i + 1]) >= 0 &&
                network.find_connection(route.lanes[i], route.lanes[i + 1]) == nullptr) {
                bad.add("route hop '" + route.lanes[i] + "' -> '" + route.lanes[i + 1] +
                        "' has no declared connection");
            }
        }
        demand.routes.push_back(std::move(route));
    }
    if (demand.count > 0) {
        double total_weight = 0.0;
        for (const auto& r : demand.routes) {
            total_weight += r.weight;
        }
        if (demand.routes.empty() || !(total_weight > 0)) {
            bad.add("demand count > 0 requires routes with positive total weight");
        }
    }
    if (dem.contains("schedule")) {
        for (const auto& s : dem.at("schedule")) {
            Departure d;
            d.step = s.at("step").get<int>();
            d.origin_lane = s.value("lane", "");
            if (d.step < 0) {
                bad.add("departure step must be >= 0");
            }
            if (!d.origin_lane.empty() && network.lane_index(d.origin_lane) < 0) {
                bad.add("departure references unknown lane '" + d.origin_lane + "'");
            }
            demand.schedule.push_back(std::move(d));
        }
        if (static_cast<int>(demand.schedule.size()) != demand.count) {
            bad.add("explicit schedule length does not match demand count");
        }
    } else if (dem.contains("flow")) {
        const auto& flow = dem.at("flow");
        demand.flow_start_step = flow.value("start_step", 0);
        demand.flow_rate_per_step = flow.value("rate_per_step", 1.0);
        if (!(demand.flow_rate_per_step > 0)) {
            bad.add("flow rate_per_step must be > 0");
        }
        if (demand.flow_start_step < 0) {
            bad.add("flow start_step must be >= 0");
        }
    }
    return demand;
}

void parse_signals(const json& doc, ScenarioSpec& spec, Violations& bad) {
    std::set<std::string> conn_ids;
    for (const auto& c : spec.network.connections) {
        conn_ids.insert(c.id());
    }
    for (const auto& s : doc.value("signals", json::array())) {
        oracle::SignalProgram program;
        program.id = s.at("id").get<std::string>();
        for (const auto& ph : s.value("phases", json::array())) {
            oracle::SignalPhase phase;
            phase.duration_s = ph.at("duration_s").get<double>();
            for (const auto& g : ph.value("green", json::array())) {
                phase.green.push_back(g.get<std::string>());
            }
            if (!(phase.duration_s > 0)) {
                bad.add("signal '" + program.id + "' has a non-positive phase duration");
            }
            for (const auto& conn : phase.green) {
                if (conn_ids.count(conn) == 0) {
                    bad.add("signal '" + program.id + "' controls unknown connection '" + conn + "'");
                }
            }
            program.phases.push_back(std::move(phase));
        }
        if (program.phases.empty()) {
            bad.add("signal '" + program.id + "' has no phases");
        }
        spec.signals.push_back(std::move(program));
    }
}

void parse_model_params(const json& doc, ScenarioSpec& spec, Violations& bad) {
    if (doc.contains("idm")) {
        const auto& p = doc.at("idm");
        spec.idm.v0 = p.value("v0", spec.idm.v0);
        spec.idm.T = p.value("T", spec.idm.T);
        spec.idm.a = p.value("a", spec.idm.a);
        spec.idm.b = p.value("b", spec.idm.b);
        spec.idm.delta = p.value("delta", spec.idm.delta);
        spec.idm.s0 = p.value("s0", spec.idm.s0);
    }
    if (doc.contains("krauss")) {
        const auto& p = doc.at("krauss");
        spec.krauss.accel = p.value("accel", spec.krauss.accel);
        spec.krauss.decel = p.value("decel", spec.krauss.decel);
        spec.krauss.tau = p.value("tau", spec.krauss.tau);
        spec.krauss.sigma = p.value("sigma", spec.krauss.sigma);
        spec.krauss.v_max = p.value("v_max", spec.krauss.v_max);
    }
    try {
        spec.idm.validate();
    } catch (const oracle::OracleError& e) {
        bad.add(e.what());
    }
    try {
        spec.krauss.validate();
    } catch (const oracle::OracleError& e) {
        bad.add(e.what());
    }
}

} // namespace

ScenarioSpec parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }

    Violations bad;
    ScenarioSpec spec;
    try {
        spec.dt_s = doc.value("dt", 1.0);
        if (!(spec.dt_s > 0)) {
            bad.add("dt must be > 0");
        }
        if (doc.contains("normalization")) {
            spec.norm.v_ref = doc.at("normalization").value("v_ref", spec.norm.v_ref);
            spec.norm.s_ref = doc.at("normalization").value("s_ref", spec.norm.s_ref);
        }
        if (!(spec.norm.v_ref > 0) || !(spec.norm.s_ref > 0)) {
            bad.add("normalization constants must be > 0");
        }
        spec.network = parse_network(doc.value("network", json::object()), bad);
        parse_signals(doc, spec, bad);
        spec.demand = parse_demand(doc.value("demand", json::object()), spec.network, bad);
        parse_model_params(doc, spec, bad);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: malformed document: ") + e.what());
    }

    if (!bad.empty()) {
        throw ScenarioError(bad.joined());
    }
    return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_summary(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << spec.network.roads.size() << " roads, " << spec.network.lanes.size() << " lanes, "
        << spec.demand.count << " vehicles, " << spec.signals.size() << " signal"
        << (spec.signals.size() == 1 ? "" : "s");
    return out.str();
}

ScenarioSpec scale_demand(const ScenarioSpec& spec, double multiplier) {
    if (!(multiplier > 0)) {
        throw ScenarioError("demand multiplier must be > 0");
    }
    ScenarioSpec scaled = spec;
    scaled.demand.count = static_cast<int>(std::lround(spec.demand.count * multiplier));
    if (!spec.demand.schedule.empty()) {
        scaled.demand.schedule.resize(
            std::min<std::size_t>(spec.demand.schedule.size(), scaled.demand.count));
    } else {
        scaled.demand.flow_rate_per_step = spec.demand.flow_rate_per_step * multiplier;
    }
    return scaled;
}

} // namespace gsim::scenario
