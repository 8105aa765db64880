#pragma once

#include <string>
#include <vector>

#include "gsim/sim/rollout.hpp"

namespace gsim::analysis {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HistogramSpec {
    double bin_width = 0.5;  ///< m/s
    double range = 5.0;      ///< +- around zero

    void validate() const;
};

/// Bins centered on multiples of bin_width; the outermost bins absorb
/// out-of-range samples. Mass is normalized to 1.
struct Histogram {
    std::vector<double> centers;
    std::vector<double> mass;
    std::size_t samples = 0;

    int modal_bin() const;
    double center_of(int bin) const { return centers.at(bin); }
    /// Total mass of samples with |value| <= limit (by bin center).
    double mass_within(double limit) const;
};

/// Distribution of dv = leader speed - follower speed over log rows that
/// have a real (non-virtual) leader.
Histogram speed_deviation_histogram(const sim::TrajectoryLog& log, const HistogramSpec& spec);

enum class TraceField { speed, accel };

/// Root mean squared difference of the field over rows matched by
/// (step, vehicle id). `matched` receives the number of matched rows.
double trace_rmse(const sim::TrajectoryLog& ref, const sim::TrajectoryLog& cmp, TraceField field,
                  std::size_t* matched = nullptr);

double mean_speed(const sim::TrajectoryLog& log);

struct DciReportRow {
    int dci = 0;
    double rmse_speed = 0.0;
};

struct DciReport {
    std::vector<DciReportRow> rows;  ///< sorted by dci
    bool ordering_ok = false;        ///< rmse non-decreasing in dci
};

/// Speed RMSE of each run against the reference. Requires >= 2 runs.
DciReport dci_report(const sim::TrajectoryLog& ref,
                     const std::vector<std::pair<int, const sim::TrajectoryLog*>>& runs);

struct ScalingRow {
    double multiplier = 1.0;
    int agents = 0;
    double wall_s = 0.0;
    double pct_delta_agents = 0.0;
    double pct_delta_runtime = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    LinearFit fit;  ///< median wall time vs agent count
    int repetitions = 3;
};

/**
 * Times full rollouts at each demand multiplier (median of `repetitions`
 * runs, simulation only, no serialization) and fits wall time against agent
 * count. `scales` must be ascending; the first row is the baseline for the
 * percentage columns.
 */
ScalingReport scaling_benchmark(const scenario::ScenarioSpec& spec, const sim::RolloutConfig& cfg,
                                const std::vector<double>& scales, int repetitions = 3);

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Scalar metrics plus whichever sections were produced.
struct MetricsReport {
    std::vector<std::pair<std::string, double>> metrics;
    std::optional<Histogram> histogram;
    std::optional<Histogram> ref_histogram;
    std::optional<ScalingReport> scaling;

    std::string to_json() const;
    std::string to_text() const;  ///< aligned plain-text table
};

} // namespace gsim::analysis
