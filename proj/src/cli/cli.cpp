#include "gsim/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsim/analysis/metrics.hpp"
#include "gsim/graph/graph_json.hpp"
#include "gsim/learn/model_json.hpp"
#include "gsim/learn/train.hpp"
#include "gsim/scenario/encode.hpp"
#include "gsim/sim/rollout.hpp"

namespace gsim::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open input file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void check_output_path(const std::string& path, const std::vector<std::string>& inputs,
                       bool force) {
    for (const auto& in : inputs) {
        if (!in.empty() && fs::weakly_canonical(fs::path(path)) ==
                               fs::weakly_canonical(fs::path(in))) {
            if (!force) {
                throw InputError("output path '" + path +
                                 "' would overwrite an input; pass --force to allow");
            }
        }
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write output file '" + path + "'");
    }
    out << content;
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const json& flags, std::uint64_t seed) {
    json doc;
    doc["command"] = command;
    doc["flags"] = flags;
    doc["seed"] = seed;
    doc["version"] = kVersion;
    write_file(output_path + ".manifest.json", doc.dump(2) + "\n");
}

sim::RolloutConfig make_rollout_config(const std::string& backend, std::int64_t steps, double dt,
                                       int dci, std::uint64_t seed) {
    sim::RolloutConfig cfg;
    cfg.backend = sim::backend_from_name(backend);
    cfg.horizon = steps;
    cfg.dt_s = dt;
    cfg.dci = dci;
    cfg.seed = seed;
    return cfg;
}

int run_validate(const std::string& scenario_path) {
    const auto spec = scenario::parse_scenario(read_file(scenario_path));
    std::cout << scenario_summary(spec) << "\n";
    return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& backend,
                 const std::string& model_path, std::int64_t steps, double dt, int dci,
                 std::uint64_t seed, const std::string& out_path, bool force) {
    const auto spec = scenario::parse_scenario(read_file(scenario_path));
    const auto cfg = make_rollout_config(backend, steps, dt, dci, seed);
    check_output_path(out_path, {scenario_path, model_path}, force);

    std::unique_ptr<sim::ModelSpeedPredictor> predictor;
    if (cfg.backend == sim::Backend::learned) {
        if (model_path.empty()) {
            throw InputError("--backend learned requires --model");
        }
        auto params = std::make_shared<learn::ModelParams>(learn::parse_model(read_file(model_path)));
        predictor = std::make_unique<sim::ModelSpeedPredictor>(std::move(params));
    }
    const auto log = sim::run(spec, cfg, predictor.get());
    write_file(out_path, sim::log_to_csv(log));
    write_manifest(out_path, "simulate",
                   json{{"scenario", scenario_path},
                        {"backend", backend},
                        {"model", model_path},
                        {"steps", steps},
                        {"dt", dt},
                        {"dci", dci},
                        {"out", out_path}},
                   seed);
    std::cout << log.rows.size() << " rows, " << log.violation_count << " violations -> "
              << out_path << "\n";
    return 0;
}

int run_collect(const std::string& scenario_path, const std::string& backend, std::int64_t steps,
                double dt, int dci, std::uint64_t seed, const std::string& out_path, bool force) {
    const auto spec = scenario::parse_scenario(read_file(scenario_path));
    const auto cfg = make_rollout_config(backend, steps, dt, dci, seed);
    check_output_path(out_path, {scenario_path}, force);
    const auto dataset = sim::collect_dataset(spec, cfg);
    write_file(out_path, learn::serialize_dataset(dataset));
    write_manifest(out_path, "collect",
                   json{{"scenario", scenario_path},
                        {"backend", backend},
                        {"steps", steps},
                        {"dt", dt},
                        {"dci", dci},
                        {"out", out_path}},
                   seed);
    std::cout << dataset.size() << " batches -> " << out_path << "\n";
    return 0;
}

int run_train(const std::string& data_path, int layers, int heads, int hidden, int epochs,
              double lr, std::uint64_t seed, const std::string& out_path, bool force) {
    const auto dataset = learn::parse_dataset(read_file(data_path));
    if (dataset.empty()) {
        throw InputError("dataset '" + data_path + "' is empty");
    }
    check_output_path(out_path, {data_path}, force);

    learn::ModelConfig config = learn::ModelConfig::for_schema(dataset.front().graph.schema());
    config.layers = layers;
    config.heads = heads;
    config.hidden = hidden;
    config.epochs = epochs;
    config.learning_rate = lr;
    config.seed = seed;
    config.validate();

    const auto result = learn::train(dataset, config);
    write_file(out_path, learn::serialize_model(result.params));
    write_manifest(out_path, "train",
                   json{{"data", data_path},
                        {"layers", layers},
                        {"heads", heads},
                        {"hidden", hidden},
                        {"epochs", epochs},
                        {"lr", lr},
                        {"out", out_path}},
                   seed);
    std::cout << "loss " << (result.loss_curve.empty() ? 0.0 : result.loss_curve.front()) << " -> "
              << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) << " over "
              << result.loss_curve.size() << " epochs -> " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& ref_path, const std::string& cmp_path,
             const std::string& report_path, double hist_bin, bool force) {
    const auto ref = sim::log_from_csv(read_file(ref_path));
    const auto cmp = sim::log_from_csv(read_file(cmp_path));
    check_output_path(report_path, {ref_path, cmp_path}, force);

    analysis::MetricsReport report;
    std::size_t matched = 0;
    const double rmse_speed = analysis::trace_rmse(ref, cmp, analysis::TraceField::speed, &matched);
    report.metrics.emplace_back("rmse_speed_mps", rmse_speed);
    report.metrics.emplace_back("rmse_accel_mps2",
                                analysis::trace_rmse(ref, cmp, analysis::TraceField::accel));
    report.metrics.emplace_back("matched_rows", static_cast<double>(matched));
    report.metrics.emplace_back("ref_mean_speed_mps", analysis::mean_speed(ref));
    report.metrics.emplace_back("violations", static_cast<double>(cmp.violation_count));

    analysis::HistogramSpec hist_spec;
    hist_spec.bin_width = hist_bin;
    report.histogram = analysis::speed_deviation_histogram(cmp, hist_spec);
    report.ref_histogram = analysis::speed_deviation_histogram(ref, hist_spec);

    write_file(report_path, report.to_json());
    write_manifest(report_path, "eval",
                   json{{"ref", ref_path},
                        {"cmp", cmp_path},
                        {"report", report_path},
                        {"hist_bin", hist_bin}},
                   0);
    std::cout << report.to_text();
    return 0;
}

int run_bench(const std::string& scenario_path, const std::string& backend,
              const std::string& scales_csv, std::int64_t steps, int repetitions,
              std::uint64_t seed, const std::string& out_path, bool force) {
    const auto spec = scenario::parse_scenario(read_file(scenario_path));
    auto cfg = make_rollout_config(backend, steps, 0.0, 1, seed);
    check_output_path(out_path, {scenario_path}, force);

    std::vector<double> scales;
    std::istringstream ss(scales_csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        scales.push_back(std::stod(token));
    }

    const auto scaling = analysis::scaling_benchmark(spec, cfg, scales, repetitions);
    analysis::MetricsReport report;
    report.metrics.emplace_back("r2", scaling.fit.r2);
    report.metrics.emplace_back("slope_s_per_agent", scaling.fit.slope);
    report.scaling = scaling;
    write_file(out_path, report.to_json());
    write_manifest(out_path, "bench",
                   json{{"scenario", scenario_path},
                        {"backend", backend},
                        {"scales", scales_csv},
                        {"steps", steps},
                        {"repetitions", repetitions},
                        {"out", out_path}},
                   seed);
    std::cout << report.to_text();
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"graph-based traffic microsimulation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string scenario_path, model_path, out_path, data_path, ref_path, cmp_path, report_path;
    std::string backend = "krauss";
    std::string scales_csv = "0.25,0.5,1.0";
    std::int64_t steps = 600;
    double dt = 0.0;
    int dci = 1;
    std::uint64_t seed = 0;
    int layers = 2, heads = 2, hidden = 32, epochs = 100, repetitions = 3;
    double lr = 3e-3, hist_bin = 0.5;
    bool force = false;

    auto* validate = app.add_subcommand("validate", "parse and summarize a scenario");
    validate->add_option("scenario", scenario_path, "scenario file")->required();

    auto* simulate = app.add_subcommand("simulate", "roll out a scenario to a trajectory log");
    simulate->add_option("--scenario", scenario_path)->required();
    simulate->add_option("--backend", backend, "idm | krauss | learned");
    simulate->add_option("--model", model_path, "model file (learned backend)");
    simulate->add_option("--steps", steps);
    simulate->add_option("--dt", dt, "override the scenario step length");
    simulate->add_option("--dci", dci, "prediction interval (learned backend)");
    simulate->add_option("--seed", seed);
    simulate->add_option("--out", out_path)->required();
    simulate->add_flag("--force", force);

    auto* collect = app.add_subcommand("collect", "sample a supervised dataset from an oracle");
    collect->add_option("--scenario", scenario_path)->required();
    collect->add_option("--backend", backend);
    collect->add_option("--steps", steps);
    collect->add_option("--dt", dt);
    collect->add_option("--dci", dci);
    collect->add_option("--seed", seed);
    collect->add_option("--out", out_path)->required();
    collect->add_flag("--force", force);

    auto* train = app.add_subcommand("train", "fit the graph model on a dataset");
    train->add_option("--data", data_path)->required();
    train->add_option("--layers", layers);
    train->add_option("--heads", heads);
    train->add_option("--hidden", hidden);
    train->add_option("--epochs", epochs);
    train->add_option("--lr", lr);
    train->add_option("--seed", seed);
    train->add_option("--out", out_path)->required();
    train->add_flag("--force", force);

    auto* eval = app.add_subcommand("eval", "compare two trajectory logs");
    eval->add_option("--ref", ref_path)->required();
    eval->add_option("--cmp", cmp_path)->required();
    eval->add_option("--report", report_path)->required();
    eval->add_option("--hist-bin", hist_bin);
    eval->add_flag("--force", force);

    auto* bench = app.add_subcommand("bench", "runtime scaling across demand multipliers");
    bench->add_option("--scenario", scenario_path)->required();
    bench->add_option("--backend", backend);
    bench->add_option("--scales", scales_csv, "comma-separated demand multipliers");
    bench->add_option("--steps", steps);
    bench->add_option("--repetitions", repetitions);
    bench->add_option("--seed", seed);
    bench->add_option("--out", out_path)->required();
    bench->add_flag("--force", force);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (validate->parsed()) {
            return run_validate(scenario_path);
        }
        if (simulate->parsed()) {
            return run_simulate(scenario_path, backend, model_path, steps, dt, dci, seed, out_path,
                                force);
        }
        if (collect->parsed()) {
            return run_collect(scenario_path, backend, steps, dt, dci, seed, out_path, force);
        }
        if (train->parsed()) {
            return run_train(data_path, layers, heads, hidden, epochs, lr, seed, out_path, force);
        }
        if (eval->parsed()) {
            return run_eval(ref_path, cmp_path, report_path, hist_bin, force);
        }
        if (bench->parsed()) {
            return run_bench(scenario_path, backend, scales_csv, steps, repetitions, seed, out_path,
                             force);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const scenario::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const graph::GraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const learn::LearnError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

} // namespace gsim::cli
