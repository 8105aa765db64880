#pragma once

#include <string>
#include <vector>

#include "gsim/oracle/car_following.hpp"

namespace gsim::oracle {

struct SignalPhase {
    std::vector<std::string> green;  ///< connection ids granted right of way
    double duration_s = 0.0;
};

/// Fixed-time cyclic signal program. The controlled set is the union of all
/// phase green sets; a controlled connection that is not green in the active
/// phase is red, an uncontrolled connection is always green.
struct SignalProgram {
    std::string id;
    std::vector<SignalPhase> phases;

    double cycle_s() const;
    std::vector<std::string> controlled_connections() const;  ///< sorted, unique
    void validate() const;
};

struct PhaseState {
    int index = 0;
    double time_into_phase_s = 0.0;
    std::vector<std::string> green;
};

/// Phase active at absolute time t >= 0 (cyclic). Throws on an empty program.
PhaseState signal_phase(const SignalProgram& program, double t);

bool is_green(const SignalProgram& program, const PhaseState& state,
              const std::string& connection_id);

} // namespace gsim::oracle
