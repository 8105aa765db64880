#include "gsim/analysis/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gsim/util/numfmt.hpp"

namespace gsim::analysis {

using nlohmann::json;

void HistogramSpec::validate() const {
    if (!(bin_width > 0)) {
        throw AnalysisError("histogram: bin width must be > 0");
    }
    if (!(range > 0)) {
        throw AnalysisError("histogram: range must be > 0");
    }
}

int Histogram::modal_bin() const {
    if (mass.empty()) {
        throw AnalysisError("histogram: empty");
    }
    return static_cast<int>(std::max_element(mass.begin(), mass.end()) - mass.begin());
}

double Histogram::mass_within(double limit) const {
    double total = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (std::abs(centers[i]) <= limit + 1e-12) {
            total += mass[i];
        }
    }
    return total;
}

Histogram speed_deviation_histogram(const sim::TrajectoryLog& log, const HistogramSpec& spec) {
    spec.validate();
    if (log.rows.empty()) {
        throw AnalysisError("speed_deviation_histogram: empty log");
    }

    // leader speeds looked up by (step, vehicle id)
    std::map<std::pair<std::int64_t, int>, double> speed_at;
    for (const auto& row : log.rows) {
        speed_at.emplace(std::make_pair(row.step, row.vehicle_id), row.speed_mps);
    }

    const int side = static_cast<int>(std::floor(spec.range / spec.bin_width + 1e-9));
    const int n_bins = 2 * side + 1;
    Histogram hist;
    hist.centers.resize(n_bins);
    hist.mass.assign(n_bins, 0.0);
    for (int i = 0; i < n_bins; ++i) {
        hist.centers[i] = (i - side) * spec.bin_width;
    }

    for (const auto& row : log.rows) {
        if (!row.leader_id) {
            continue;
        }
        auto it = speed_at.find({row.step, *row.leader_id});
        if (it == speed_at.end()) {
            continue;  // leader resolved across a boundary outside the log
        }
        const double dv = it->second - row.speed_mps;
        int bin = side + static_cast<int>(std::lround(dv / spec.bin_width));
        bin = std::clamp(bin, 0, n_bins - 1);
        hist.mass[bin] += 1.0;
        ++hist.samples;
    }
    if (hist.samples == 0) {
        throw AnalysisError("speed_deviation_histogram: no rows with a real leader");
    }
    for (auto& m : hist.mass) {
        m /= static_cast<double>(hist.samples);
    }
    return hist;
}

double trace_rmse(const sim::TrajectoryLog& ref, const sim::TrajectoryLog& cmp, TraceField field,
                  std::size_t* matched) {
    std::map<std::pair<std::int64_t, int>, double> ref_value;
    for (const auto& row : ref.rows) {
        ref_value.emplace(std::make_pair(row.step, row.vehicle_id),
                          field == TraceField::speed ? row.speed_mps : row.accel_mps2);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : cmp.rows) {
        auto it = ref_value.find({row.step, row.vehicle_id});
        if (it == ref_value.end()) {
            continue;
        }
        const double v = field == TraceField::speed ? row.speed_mps : row.accel_mps2;
        const double d = v - it->second;
        sum += d * d;
        ++n;
    }
    if (matched != nullptr) {
        *matched = n;
    }
    if (n == 0) {
        throw AnalysisError("trace_rmse: no rows matched by (step, vehicle id)");
    }
    return std::sqrt(sum / static_cast<double>(n));
}

double mean_speed(const sim::TrajectoryLog& log) {
    if (log.rows.empty()) {
        throw AnalysisError("mean_speed: empty log");
    }
    double sum = 0.0;
    for (const auto& row : log.rows) {
        sum += row.speed_mps;
    }
    return sum / static_cast<double>(log.rows.size());
}

DciReport dci_report(const sim::TrajectoryLog& ref,
                     const std::vector<std::pair<int, const sim::TrajectoryLog*>>& runs) {
    if (runs.size() < 2) {
        throw AnalysisError("dci_report: need at least two runs");
    }
    DciReport report;
    for (const auto& [dci, log] : runs) {
        report.rows.push_back({dci, trace_rmse(ref, *log, TraceField::speed)});
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const auto& a, const auto& b) { return a.dci < b.dci; });
    report.ordering_ok = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (report.rows[i].rmse_speed + 1e-12 < report.rows[i - 1].rmse_speed) {
            report.ordering_ok = false;
        }
    }
    return report;
}

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw AnalysisError("least_squares_fit: need >= 2 points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) {
        throw AnalysisError("least_squares_fit: degenerate x values");
    }
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double y_mean = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - y_mean) * (y[i] - y_mean);
    }
    fit.r2 = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

ScalingReport scaling_benchmark(const scenario::ScenarioSpec& spec, const sim::RolloutConfig& cfg,
                                const std::vector<double>& scales, int repetitions) {
    if (scales.size() < 2) {
        throw AnalysisError("scaling_benchmark: need at least two scales");
    }
    if (!std::is_sorted(scales.begin(), scales.end())) {
        throw AnalysisError("scaling_benchmark: scales must be ascending");
    }
    if (repetitions < 1) {
        throw AnalysisError("scaling_benchmark: repetitions must be >= 1");
    }

    ScalingReport report;
    report.repetitions = repetitions;
    std::vector<double> agents, times;
    for (double multiplier : scales) {
        const auto scaled = scenario::scale_demand(spec, multiplier);
        std::vector<double> samples;
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto log = sim::run(scaled, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            (void)log;
            samples.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(samples.begin(), samples.end());
        const double median = samples[samples.size() / 2];

        ScalingRow row;
        row.multiplier = multiplier;
        row.agents = scaled.demand.count;
        row.wall_s = median;
        report.rows.push_back(row);
        agents.push_back(static_cast<double>(row.agents));
        times.push_back(median);
    }
    const double base_agents = static_cast<double>(report.rows.front().agents);
    const double base_time = report.rows.front().wall_s;
    for (auto& row : report.rows) {
        row.pct_delta_agents = 100.0 * (row.agents - base_agents) / base_agents;
        row.pct_delta_runtime = base_time > 0 ? 100.0 * (row.wall_s - base_time) / base_time : 0.0;
    }
    report.fit = least_squares_fit(agents, times);
    return report;
}

std::string MetricsReport::to_json() const {
    json doc;
    json m = json::object();
    for (const auto& [name, value] : metrics) {
        m[name] = value;
    }
    doc["metrics"] = std::move(m);
    auto hist_json = [](const Histogram& h) {
        return json{{"centers", h.centers}, {"mass", h.mass}, {"samples", h.samples}};
    };
    if (histogram) {
        doc["histogram"] = hist_json(*histogram);
    }
    if (ref_histogram) {
        doc["ref_histogram"] = hist_json(*ref_histogram);
    }
    if (scaling) {
        json rows = json::array();
        for (const auto& r : scaling->rows) {
            rows.push_back({{"multiplier", r.multiplier},
                            {"agents", r.agents},
                            {"wall_s", r.wall_s},
                            {"pct_delta_agents", r.pct_delta_agents},
                            {"pct_delta_runtime", r.pct_delta_runtime}});
        }
        doc["scaling"] = std::move(rows);
        doc["fit"] = {{"slope", scaling->fit.slope},
                      {"intercept", scaling->fit.intercept},
                      {"r2", scaling->fit.r2}};
    }
    return doc.dump(2) + "\n";
}

std::string MetricsReport::to_text() const {
    std::ostringstream out;
    out << std::left;
    for (const auto& [name, value] : metrics) {
        out << std::setw(28) << name << util::format_double(value) << "\n";
    }
    if (histogram) {
        out << "\nspeed deviation histogram (center  mass):\n";
        for (std::size_t i = 0; i < histogram->centers.size(); ++i) {
            out << std::setw(8) << util::format_double(histogram->centers[i])
                << util::format_double(histogram->mass[i]) << "\n";
        }
    }
    if (scaling) {
        out << "\nscaling (agents  wall_s  %d_agents  %d_runtime):\n";
        for (const auto& r : scaling->rows) {
            out << std::setw(8) << r.agents << std::setw(12) << util::format_double(r.wall_s)
                << std::setw(12) << util::format_double(r.pct_delta_agents)
                << util::format_double(r.pct_delta_runtime) << "\n";
        }
        out << "fit: slope " << util::format_double(scaling->fit.slope) << " s/agent, intercept "
            << util::format_double(scaling->fit.intercept) << " s, R^2 "
            << util::format_double(scaling->fit.r2) << "\n";
    }
    return out.str();
}

} // namespace gsim::analysis
