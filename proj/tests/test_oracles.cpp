#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gsim/oracle/car_following.hpp"
#include "gsim/oracle/signal.hpp"
#include "gsim/util/rng.hpp"

using namespace gsim::oracle;

namespace {

// Independent root-finder for the IDM equilibrium gap: bisection on
// idm_accel(v, 0, s) over s. Cross-checks the closed form used elsewhere.
double equilibrium_gap_by_bisection(double v, const IdmParams& p) {
    double lo = p.s0 * 1e-3, hi = 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (idm_accel(v, 0.0, mid, p) > 0.0) {
            hi = mid;  // accel > 0 means the gap is roomier than equilibrium
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("idm free road from rest accelerates at a") {
    IdmParams p;
    CHECK(idm_accel(0.0, 0.0, 1e6, p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("idm at desired speed on free road is in equilibrium") {
    IdmParams p;
    CHECK(std::abs(idm_accel(15.0, 0.0, 1e6, p)) < 1e-8);
}

TEST_CASE("idm equilibrium gap matches the closed form and the root finder") {
    IdmParams p;
    const double closed_form = idm_equilibrium_gap(10.0, p);
    CHECK(closed_form == doctest::Approx(18.9773).epsilon(1e-4));
    const double root = equilibrium_gap_by_bisection(10.0, p);
    CHECK(closed_form == doctest::Approx(root).epsilon(1e-9));
    CHECK(std::abs(idm_accel(10.0, 0.0, 18.9773, p)) < 1e-6);
}

TEST_CASE("idm rejects non-positive gaps") {
    IdmParams p;
    CHECK_THROWS_AS(idm_accel(5.0, 0.0, 0.0, p), OracleError);
    CHECK_THROWS_AS(idm_accel(5.0, 0.0, -1.0, p), OracleError);
}

TEST_CASE("idm acceleration never exceeds a") {
    IdmParams p;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double v = gsim::util::next_u01(rng) * 20.0;
        const double dv = gsim::util::next_symmetric(rng, 10.0);
        const double s = 0.5 + gsim::util::next_u01(rng) * 200.0;
        CHECK(idm_accel(v, dv, s, p) <= p.a + 1e-12);
    }
}

TEST_CASE("idm monotonicity in v, s and dv") {
    IdmParams p;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const double v = gsim::util::next_u01(rng) * 14.0;
        const double dv = gsim::util::next_symmetric(rng, 5.0);
        const double s = 5.0 + gsim::util::next_u01(rng) * 100.0;
        const double eps = 1e-3;
        // decreasing in v (holding dv, s)
        CHECK(idm_accel(v + eps, dv, s, p) <= idm_accel(v, dv, s, p) + 1e-12);
        // increasing in s (holding v, dv)
        CHECK(idm_accel(v, dv, s + eps, p) >= idm_accel(v, dv, s, p) - 1e-12);
        // decreasing in dv (holding v, s); v > 0 so the headway term responds
        if (v > 0.1) {
            CHECK(idm_accel(v, dv + eps, s, p) <= idm_accel(v, dv, s, p) + 1e-12);
        }
    }
}

TEST_CASE("krauss standstill stays stopped") {
    KraussParams p;
    CHECK(krauss_next_speed(0.0, 0.0, 0.0, p, 1.0, 0.0) == 0.0);
}

TEST_CASE("krauss free-flow acceleration") {
    KraussParams p;
    CHECK(krauss_next_speed(10.0, 3.0, 1e6, p, 1.0, 0.0) == doctest::Approx(12.6).epsilon(1e-12));
}

TEST_CASE("krauss safe speed binds") {
    KraussParams p;
    // v_safe = 8 + (20 - 8) / ((18/9) + 1) = 12
    CHECK(krauss_next_speed(10.0, 8.0, 20.0, p, 1.0, 0.0) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("krauss output bounded and monotone in gap") {
    KraussParams p;
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const double vf = gsim::util::next_u01(rng) * 15.0;
        const double vl = gsim::util::next_u01(rng) * 15.0;
        const double gap = gsim::util::next_u01(rng) * 100.0;
        const double noise = gsim::util::next_u01(rng);
        KraussParams noisy = p;
        noisy.sigma = 0.5;
        const double v = krauss_next_speed(vf, vl, gap, noisy, 1.0, noise);
        CHECK(v >= 0.0);
        CHECK(v <= noisy.v_max);
        CHECK(krauss_next_speed(vf, vl, gap + 1.0, p, 1.0, 0.0) >=
              krauss_next_speed(vf, vl, gap, p, 1.0, 0.0) - 1e-12);
    }
}

TEST_CASE("krauss with sigma 0 is deterministic in the noise argument") {
    KraussParams p;
    CHECK(krauss_next_speed(5.0, 5.0, 30.0, p, 1.0, 0.1) ==
          krauss_next_speed(5.0, 5.0, 30.0, p, 1.0, 0.9));
}

TEST_CASE("signal phases cycle") {
    SignalProgram prog;
    prog.id = "tl";
    prog.phases = {{{"a>b"}, 30.0}, {{"c>d"}, 30.0}};

    CHECK(signal_phase(prog, 0.0).index == 0);
    const auto at45 = signal_phase(prog, 45.0);
    CHECK(at45.index == 1);
    CHECK(at45.time_into_phase_s == doctest::Approx(15.0));
    const auto at75 = signal_phase(prog, 75.0);
    CHECK(at75.index == 0);
    CHECK(at75.time_into_phase_s == doctest::Approx(15.0));
}

TEST_CASE("signal phase is cycle-periodic") {
    SignalProgram prog;
    prog.id = "tl";
    prog.phases = {{{"a>b"}, 17.0}, {{"c>d"}, 13.0}, {{"e>f"}, 5.0}};
    const double cycle = prog.cycle_s();
    for (double t = 0.0; t < 80.0; t += 0.7) {
        const auto now = signal_phase(prog, t);
        const auto later = signal_phase(prog, t + cycle);
        CHECK(now.index == later.index);
        CHECK(now.time_into_phase_s == doctest::Approx(later.time_into_phase_s).epsilon(1e-9));
    }
}

TEST_CASE("signal rejects empty programs and uncontrolled connections are green") {
    SignalProgram empty;
    empty.id = "none";
    CHECK_THROWS_AS(signal_phase(empty, 0.0), OracleError);

    SignalProgram prog;
    prog.id = "tl";
    prog.phases = {{{"a>b"}, 10.0}, {{"c>d"}, 10.0}};
    const auto phase0 = signal_phase(prog, 0.0);
    CHECK(is_green(prog, phase0, "a>b"));
    CHECK_FALSE(is_green(prog, phase0, "c>d"));
    CHECK(is_green(prog, phase0, "not>controlled"));
}
