#pragma once

#include <stdexcept>

namespace gsim::oracle {

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Intelligent Driver Model parameters. All strictly positive.
struct IdmParams {
    double v0 = 15.0;    ///< desired speed [m/s]
    double T = 1.5;      ///< time headway [s]
    double a = 1.0;      ///< maximum acceleration [m/s^2]
    double b = 1.5;      ///< comfortable deceleration [m/s^2]
    double delta = 4.0;  ///< free-flow exponent
    double s0 = 2.0;     ///< minimum gap [m]

    void validate() const;
};

/// Krauss safe-speed model parameters.
struct KraussParams {
    double accel = 2.6;   ///< [m/s^2]
    double decel = 4.5;   ///< [m/s^2]
    double tau = 1.0;     ///< reaction time [s]
    double sigma = 0.0;   ///< driver imperfection in [0,1]; 0 = deterministic
    double v_max = 15.0;  ///< [m/s]

    void validate() const;
};

/**
 * IDM acceleration for a follower at speed v with speed difference
 * dv = v_follower - v_leader and gap s:
 *
 *   accel = a * (1 - (v/v0)^delta - (s*/s)^2),
 *   s*    = s0 + v*T + v*dv / (2*sqrt(a*b))
 *
 * The braking term is not clipped; integration is expected to clamp speeds
 * at zero. Throws OracleError for s <= 0, which signals an upstream
 * collision.
 */
double idm_accel(double v, double dv, double s, const IdmParams& p);

/// Gap at which idm_accel(v, 0, gap) = 0: (s0 + v*T) / sqrt(1 - (v/v0)^delta).
double idm_equilibrium_gap(double v, const IdmParams& p);

/**
 * Krauss next speed:
 *
 *   v_safe = v_l + (gap - v_l*tau) / ((v_l + v_f)/(2*b) + tau)
 *   v_des  = min(v_max, v_f + a*dt, v_safe)
 *   v_next = max(0, v_des - sigma*a*dt*noise),  noise in [0,1]
 *
 * Clamps rather than throws; result is in [0, v_max].
 */
double krauss_next_speed(double v_f, double v_l, double gap, const KraussParams& p, double dt,
                         double noise);

} // namespace gsim::oracle
