#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsim/oracle/signal.hpp"
#include "gsim/scenario/scenario.hpp"

namespace gsim::sim {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct VehicleState {
    int id = -1;
    int lane = -1;          ///< index into ScenarioSpec::network.lanes
    double offset_m = 0.0;  ///< from lane start
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
    int route = -1;         ///< index into DemandSpec::routes
    int route_pos = 0;      ///< index of the current lane within the route
    double length_m = 5.0;
    double hold_speed_mps = -1.0;  ///< learned-backend zero-order hold; <0 = none

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct PendingDeparture {
    int step = 0;
    int vehicle_id = -1;
    int route = -1;

    friend bool operator==(const PendingDeparture&, const PendingDeparture&) = default;
};

/// Physical state of the system at one step: active vehicles (ordered by id),
/// departures not yet inserted, and the active phase of each signal.
struct WorldState {
    std::int64_t step = 0;
    std::vector<VehicleState> vehicles;
    std::vector<PendingDeparture> pending;
    std::vector<oracle::PhaseState> phases;  ///< parallel to ScenarioSpec::signals
    std::int64_t entered = 0;
    std::int64_t exited = 0;

    bool operator==(const WorldState& other) const {
        if (step != other.step || vehicles != other.vehicles || pending != other.pending ||
            entered != other.entered || exited != other.exited ||
            phases.size() != other.phases.size()) {
            return false;
        }
        for (std::size_t i = 0; i < phases.size(); ++i) {
            if (phases[i].index != other.phases[i].index ||
                phases[i].time_into_phase_s != other.phases[i].time_into_phase_s) {
                return false;
            }
        }
        return true;
    }
};

enum class Backend { idm, krauss, learned };

std::string backend_name(Backend b);
Backend backend_from_name(const std::string& name);

struct RolloutConfig {
    Backend backend = Backend::krauss;
    double dt_s = 0.0;  ///< <= 0: use the scenario's dt
    std::int64_t horizon = 600;
    int dci = 1;        ///< data collection interval [steps]
    std::uint64_t seed = 0;

    void validate() const;
};

constexpr double kGapSentinel = 1e6;

struct TrajectoryRow {
    std::int64_t step = 0;
    double time_s = 0.0;
    int vehicle_id = -1;
    std::string lane_id;
    double offset_m = 0.0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
    std::optional<int> leader_id;  ///< empty for none or a virtual stop-line leader
    double gap_m = kGapSentinel;
};

/// Per-step, per-vehicle records, sorted by (step, vehicle id).
struct TrajectoryLog {
    std::vector<TrajectoryRow> rows;
    std::int64_t violation_count = 0;  ///< learned-backend collision clamps
};

/// CSV with header
/// step,time_s,vehicle_id,lane_id,offset_m,speed_mps,accel_mps2,leader_id,gap_m
std::string log_to_csv(const TrajectoryLog& log);
TrajectoryLog log_from_csv(const std::string& text);

} // namespace gsim::sim
