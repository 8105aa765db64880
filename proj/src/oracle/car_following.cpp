#include "gsim/oracle/car_following.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gsim::oracle {

void IdmParams::validate() const {
    if (v0 <= 0 || T <= 0 || a <= 0 || b <= 0 || delta <= 0 || s0 <= 0) {
        throw OracleError("idm: all parameters must be strictly positive");
    }
}

void KraussParams::validate() const {
    if (accel <= 0 || decel <= 0 || tau <= 0 || v_max <= 0) {
        throw OracleError("krauss: accel, decel, tau, v_max must be strictly positive");
    }
    if (sigma < 0 || sigma > 1) {
        throw OracleError("krauss: sigma must lie in [0,1]");
    }
}

double idm_accel(double v, double dv, double s, const IdmParams& p) {
    if (s <= 0) {
        throw OracleError("idm_accel: non-positive gap (" + std::to_string(s) +
                          " m) signals a collision upstream");
    }
    if (v < 0) {
        throw OracleError("idm_accel: negative speed");
    }
    const double s_star = p.s0 + v * p.T + v * dv / (2.0 * std::sqrt(p.a * p.b));
    const double ratio = s_star / s;
    return p.a * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
}

double idm_equilibrium_gap(double v, const IdmParams& p) {
    const double free_term = 1.0 - std::pow(v / p.v0, p.delta);
    if (free_term <= 0) {
        throw OracleError("idm_equilibrium_gap: no equilibrium at or above desired speed");
    }
    return (p.s0 + v * p.T) / std::sqrt(free_term);
}

double krauss_next_speed(double v_f, double v_l, double gap, const KraussParams& p, double dt,
                         double noise) {
    gap = std::max(gap, 0.0);
    v_f = std::max(v_f, 0.0);
    v_l = std::max(v_l, 0.0);
    const double v_safe = v_l + (gap - v_l * p.tau) / ((v_l + v_f) / (2.0 * p.decel) + p.tau);
    const double v_des = std::min({p.v_max, v_f + p.accel * dt, v_safe});
    const double v_next = v_des - p.sigma * p.accel * dt * noise;
    return std::clamp(v_next, 0.0, p.v_max);
}

} // namespace gsim::oracle
