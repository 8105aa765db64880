#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsim/oracle/car_following.hpp"
#include "gsim/oracle/signal.hpp"

namespace gsim::scenario {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Movement { straight, left, right };

std::string movement_name(Movement m);
Movement movement_from_name(const std::string& name);

struct RoadDef {
    std::string id;
    std::string from_junction;
    std::string to_junction;
    double length_m = 0.0;
    int lane_count = 1;
};

struct LaneDef {
    std::string id;       ///< "<road_id>_<lane_index>"
    std::string road_id;
    int index = 0;
    double length_m = 0.0;
    double speed_limit_mps = 0.0;
};

struct JunctionDef {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

struct ConnectionDef {
    std::string from_lane;
    std::string to_lane;
    Movement movement = Movement::straight;

    std::string id() const { return from_lane + ">" + to_lane; }
};

struct NetworkSpec {
    std::vector<RoadDef> roads;
    std::vector<LaneDef> lanes;  ///< derived from roads at parse time
    std::vector<JunctionDef> junctions;
    std::vector<ConnectionDef> connections;
    double stop_line_offset_m = 1.0;
    double vehicle_length_m = 5.0;

    int lane_index(const std::string& lane_id) const;  ///< -1 when unknown
    const LaneDef& lane(int index) const { return lanes.at(index); }
    /// Connection leaving `from_lane` toward `to_lane`, if declared.
    const ConnectionDef* find_connection(const std::string& from_lane,
                                         const std::string& to_lane) const;

private:
    mutable std::unordered_map<std::string, int> lane_lookup_;
};

struct RouteDef {
    std::vector<std::string> lanes;
    double weight = 1.0;
};

struct Departure {
    int step = 0;
    std::string origin_lane;  ///< empty = determined by the drawn route
};

struct DemandSpec {
    int count = 0;
    std::vector<Departure> schedule;  ///< explicit per-vehicle entries, optional
    int flow_start_step = 0;          ///< used when schedule is empty
    double flow_rate_per_step = 1.0;
    std::vector<RouteDef> routes;
};

struct Normalization {
    double v_ref = 15.0;  ///< speed scale [m/s]
    double s_ref = 100.0; ///< distance scale [m]
};

/// Full scenario: network, signal programs, demand, step length and the
/// normalization constants used when encoding the world as a graph.
struct ScenarioSpec {
    NetworkSpec network;
    std::vector<oracle::SignalProgram> signals;
    DemandSpec demand;
    double dt_s = 1.0;
    Normalization norm;
    oracle::IdmParams idm;
    oracle::KraussParams krauss;

    /// Signal gating the connection, with the program index, if any.
    const oracle::SignalProgram* signal_for_connection(const std::string& connection_id) const;
    double max_speed_mps() const;
};

/// Parses and validates a scenario document. On failure the error message
/// lists every violation found, not just the first.
ScenarioSpec parse_scenario(const std::string& text);

ScenarioSpec load_scenario_file(const std::string& path);

/// "8 roads, 16 lanes, 768 vehicles, 1 signal"
std::string scenario_summary(const ScenarioSpec& spec);

/// Copy of the scenario with demand count (and flow rate) scaled by
/// `multiplier`; used by the scaling benchmark and reduced-size variants.
ScenarioSpec scale_demand(const ScenarioSpec& spec, double multiplier);

} // namespace gsim::scenario
