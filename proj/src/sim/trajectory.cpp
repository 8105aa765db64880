#include <charconv>
#include <sstream>

#include "gsim/sim/world.hpp"
#include "gsim/util/numfmt.hpp"

namespace gsim::sim {

namespace {
constexpr const char* kHeader = "step,time_s,vehicle_id,lane_id,offset_m,speed_mps,accel_mps2,leader_id,gap_m";
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::idm: return "idm";
        case Backend::krauss: return "krauss";
        case Backend::learned: return "learned";
    }
    return "krauss";
}

Backend backend_from_name(const std::string& name) {
    if (name == "idm") return Backend::idm;
    if (name == "krauss") return Backend::krauss;
    if (name == "learned") return Backend::learned;
    throw SimError("unknown backend '" + name + "'");
}

void RolloutConfig::validate() const {
    if (horizon < 0) {
        throw SimError("rollout: horizon must be >= 0");
    }
    if (dci < 1) {
        throw SimError("rollout: dci must be >= 1");
    }
}

std::string log_to_csv(const TrajectoryLog& log) {
    std::ostringstream out;
    out << kHeader << "\n";
    for (const auto& r : log.rows) {
        out << r.step << ',' << util::format_double(r.time_s) << ',' << r.vehicle_id << ','
            << r.lane_id << ',' << util::format_double(r.offset_m) << ','
            << util::format_double(r.speed_mps) << ',' << util::format_double(r.accel_mps2) << ',';
        if (r.leader_id) {
            out << *r.leader_id;
        }
        out << ',';
        if (r.gap_m == kGapSentinel) {
            out << "1e6";
        } else {
            out << util::format_double(r.gap_m);
        }
        out << "\n";
    }
    return out.str();
}

TrajectoryLog log_from_csv(const std::string& text) {
    TrajectoryLog log;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw SimError("trajectory csv: missing or unexpected header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        // a trailing empty gap cell would be dropped by getline; rows always
        // end with gap_m, so a 8-cell row means the leader cell was last
        if (cells.size() == 8) {
            cells.push_back("");
        }
        if (cells.size() != 9) {
            throw SimError("trajectory csv: malformed row '" + line + "'");
        }
        TrajectoryRow r;
        r.step = std::stoll(cells[0]);
        r.time_s = std::stod(cells[1]);
        r.vehicle_id = std::stoi(cells[2]);
        r.lane_id = cells[3];
        r.offset_m = std::stod(cells[4]);
        r.speed_mps = std::stod(cells[5]);
        r.accel_mps2 = std::stod(cells[6]);
        if (!cells[7].empty()) {
            r.leader_id = std::stoi(cells[7]);
        }
        r.gap_m = cells[8].empty() ? kGapSentinel : std::stod(cells[8]);
        log.rows.push_back(std::move(r));
    }
    return log;
}

} // namespace gsim::sim
