#include "gsim/oracle/signal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gsim::oracle {

double SignalProgram::cycle_s() const {
    double sum = 0.0;
    for (const auto& ph : phases) {
        sum += ph.duration_s;
    }
    return sum;
}

std::vector<std::string> SignalProgram::controlled_connections() const {
    std::set<std::string> all;
    for (const auto& ph : phases) {
        all.insert(ph.green.begin(), ph.green.end());
    }
    return {all.begin(), all.end()};
}

void SignalProgram::validate() const {
    if (phases.empty()) {
        throw OracleError("signal '" + id + "': empty phase list");
    }
    for (const auto& ph : phases) {
        if (!(ph.duration_s > 0)) {
            throw OracleError("signal '" + id + "': non-positive phase duration");
        }
    }
    // Union-of-greens as the controlled set already guarantees every
    // controlled connection appears in at least one phase.
}

PhaseState signal_phase(const SignalProgram& program, double t) {
    program.validate();
    if (t < 0) {
        throw OracleError("signal_phase: negative time");
    }
    const double cycle = program.cycle_s();
    double into = std::fmod(t, cycle);
    for (int i = 0; i < static_cast<int>(program.phases.size()); ++i) {
        if (into < program.phases[i].duration_s) {
            return PhaseState{i, into, program.phases[i].green};
        }
        into -= program.phases[i].duration_s;
    }
    // fmod rounding can land exactly on the cycle boundary; wrap to phase 0.
    return PhaseState{0, 0.0, program.phases[0].green};
}

bool is_green(const SignalProgram& program, const PhaseState& state,
              const std::string& connection_id) {
    const auto controlled = program.controlled_connections();
    if (!std::binary_search(controlled.begin(), controlled.end(), connection_id)) {
        return true;
    }
    return std::find(state.green.begin(), state.green.end(), connection_id) != state.green.end();
}

} // namespace gsim::oracle
