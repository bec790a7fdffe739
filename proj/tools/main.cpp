// ipsim command line: calibrate radios, run scenarios (directly or through
// the simulated node/server network), train and evaluate the proximity
// classifiers, and report positioning quality. Results go to stdout,
// diagnostics to stderr; every machine output is JSON or CSV.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ipsim/dataset.hpp"
#include "ipsim/evalkit.hpp"
#include "ipsim/ml.hpp"
#include "ipsim/netsim.hpp"
#include "ipsim/pathloss.hpp"
#include "ipsim/rng.hpp"
#include "ipsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("IPS_SIM_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError("IPS_SIM_SEED must be an unsigned integer");
        }
    }
    return 0;
}

std::string read_stream_or_file(const std::string& path, const char* what) {
    if (path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(std::string("cannot open ") + what + " '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<ipsim::DatasetRow> load_dataset(const std::string& path) {
    std::istringstream in(read_stream_or_file(path, "dataset"));
    return ipsim::read_dataset_csv(in);
}

std::string stem_of(const std::string& path) {
    if (path == "-") return "stdin";
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name.resize(dot);
    return name;
}

struct CalibrateArgs {
    std::vector<std::string> samples;
    double known_distance = 0.0;
    std::string estimator = "mean";
};

int run_calibrate(const CalibrateArgs& args) {
    const ipsim::Estimator estimator =
        args.estimator == "median" ? ipsim::Estimator::Median : ipsim::Estimator::Mean;

    auto by_ap = [](const std::vector<ipsim::RssiSample>& samples) {
        std::map<int, std::vector<ipsim::RssiSample>> groups;
        for (const ipsim::RssiSample& s : samples) groups[s.ap_id].push_back(s);
        return groups;
    };

    std::istringstream ref_in(read_stream_or_file(args.samples[0], "1 m sample file"));
    std::istringstream known_in(read_stream_or_file(args.samples[1], "known-distance sample file"));
    const auto ref_groups = by_ap(ipsim::read_samples_csv(ref_in));
    const auto known_groups = by_ap(ipsim::read_samples_csv(known_in));
    if (ref_groups.empty()) {
        throw std::runtime_error("1 m sample file contains no samples");
    }

    nlohmann::json out = nlohmann::json::array();
    for (const auto& [ap_id, ref_samples] : ref_groups) {
        const auto known_it = known_groups.find(ap_id);
        if (known_it == known_groups.end()) {
            throw std::runtime_error("no known-distance samples for ap_id " +
                                     std::to_string(ap_id));
        }
        ipsim::PathLossParams params;
        params.ap_id = ap_id;
        params.a_ref = ipsim::calibrate_a(ref_samples, estimator);
        params.n_env =
            ipsim::calibrate_n(known_it->second, args.known_distance, params.a_ref, estimator);
        ipsim::validate(params);
        if (const auto warning = ipsim::typical_range_warning(params)) {
            std::cerr << "warning: ap " << ap_id << ": " << *warning << '\n';
        }
        out.push_back({{"ap_id", params.ap_id}, {"a_ref", params.a_ref}, {"n_env", params.n_env}});
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
}

struct SimulateArgs {
    std::string scenario = "stationary";
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma;
    std::string out_path;
    bool net = false;
    std::string signals_path;
    std::string positions_path;
    std::optional<double> drop;
    std::optional<int> latency;
    std::optional<int> staleness;
};

ipsim::ScenarioSpec resolve_scenario(const std::string& arg, ipsim::NetSettings& net_settings) {
    std::ifstream file(arg);
    if (file) {
        std::ostringstream buffer;
        buffer << file.rdbuf();
        const std::string text = buffer.str();
        if (const auto parsed = ipsim::net_settings_from_json_text(text)) {
            net_settings = *parsed;
        }
        return ipsim::scenario_from_json_text(text);
    }
    return ipsim::builtin_scenario(arg);
}

int run_simulate(const SimulateArgs& args) {
    const bool csv_to_stdout = args.out_path.empty() || args.out_path == "-";
    if (args.net && args.signals_path.empty() && csv_to_stdout) {
        throw UsageError("--net writes two outputs; pass --out or --signals so they do not "
                         "both land on stdout");
    }

    ipsim::NetSettings net_settings;
    ipsim::ScenarioSpec spec = resolve_scenario(args.scenario, net_settings);

    const std::uint64_t seed = args.seed.value_or(default_seed());
    spec.noise.seed = ipsim::derive_seed(seed, "sim/noise");
    net_settings.channel.seed = ipsim::derive_seed(seed, "sim/channel");
    if (args.sigma) spec.noise.sigma_db = *args.sigma;
    if (args.drop) net_settings.channel.drop_probability = *args.drop;
    if (args.latency) net_settings.channel.latency_ticks = *args.latency;
    if (args.staleness) net_settings.staleness_horizon_ticks = *args.staleness;

    const ipsim::ScenarioRun run = ipsim::run_scenario(spec);

    std::vector<ipsim::DatasetRow> rows;
    std::vector<ipsim::NavSignal> signals;
    std::vector<ipsim::PositionRecord> position_records;
    if (args.net) {
        const ipsim::NetRunResult net = ipsim::run_scenario_net(
            spec, net_settings.channel, net_settings.staleness_horizon_ticks);
        rows = ipsim::dataset_from_net_run(run, net);
        signals = net.signals();
        for (std::size_t i = 0; i < net.outputs.size(); ++i) {
            const double t = run.truth[i].timestamp;
            if (net.outputs[i].human) {
                position_records.push_back({t, ipsim::AgentId::Human, *net.outputs[i].human});
            }
            if (net.outputs[i].robot) {
                position_records.push_back({t, ipsim::AgentId::Robot, *net.outputs[i].robot});
            }
        }
        std::cerr << "net: " << net.reports_sent << " reports sent, " << net.reports_dropped
                  << " dropped, signal rate " << net.signal_rate() << '\n';
    } else {
        rows = ipsim::dataset_from_run(run);
        for (const ipsim::EstimatedFrame& est : run.estimates) {
            position_records.push_back({est.timestamp, ipsim::AgentId::Human, est.human_est});
            position_records.push_back({est.timestamp, ipsim::AgentId::Robot, est.robot_est});
        }
    }

    if (csv_to_stdout) {
        ipsim::write_dataset_csv(std::cout, rows);
    } else {
        std::ofstream out(args.out_path);
        if (!out) throw std::runtime_error("cannot write dataset '" + args.out_path + "'");
        ipsim::write_dataset_csv(out, rows);
    }

    if (args.net) {
        const bool signals_to_stdout = args.signals_path.empty() || args.signals_path == "-";
        std::ofstream file;
        if (!signals_to_stdout) {
            file.open(args.signals_path);
            if (!file) {
                throw std::runtime_error("cannot write signal log '" + args.signals_path + "'");
            }
        }
        std::ostream& out = signals_to_stdout ? std::cout : file;
        for (const ipsim::NavSignal& s : signals) {
            out << ipsim::navsignal_json_line(s) << '\n';
        }
    }

    if (!args.positions_path.empty()) {
        std::ofstream out(args.positions_path);
        if (!out) {
            throw std::runtime_error("cannot write positions '" + args.positions_path + "'");
        }
        ipsim::write_positions_csv(out, position_records);
    }
    return kExitOk;
}

struct TrainArgs {
    std::string data = "-";
    std::string model = "lr";
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> train_fraction;
};

int run_train(const TrainArgs& args) {
    const ipsim::ModelKind kind = ipsim::model_kind_from_string(args.model);
    ipsim::TrainConfig config = ipsim::default_train_config(kind);
    config.seed = ipsim::derive_seed(args.seed.value_or(default_seed()), "ml/train");
    if (args.train_fraction) config.train_fraction = *args.train_fraction;

    const std::vector<ipsim::FeatureRow> rows = ipsim::feature_rows(load_dataset(args.data));
    const auto [train_rows, test_rows] = ipsim::split(
        rows, config.train_fraction,
        ipsim::derive_seed(args.seed.value_or(default_seed()), "ml/split"));

    const ipsim::LinearModel model = ipsim::train(train_rows, kind, config);
    if (model.single_class_warning) {
        std::cerr << "warning: training data holds a single class; model is a constant "
                     "predictor\n";
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw std::runtime_error("cannot write model '" + args.out_path + "'");
        out << ipsim::model_to_json_text(model) << '\n';
    }
    std::cout << ipsim::metrics_to_json_text(ipsim::evaluate(model, test_rows)) << '\n';
    return kExitOk;
}

struct EvaluateArgs {
    std::string data = "-";
    std::string model_file;
};

int run_evaluate(const EvaluateArgs& args) {
    const ipsim::LinearModel model =
        ipsim::model_from_json_text(read_stream_or_file(args.model_file, "model"));
    const std::vector<ipsim::FeatureRow> rows = ipsim::feature_rows(load_dataset(args.data));
    std::cout << ipsim::metrics_to_json_text(ipsim::evaluate(model, rows)) << '\n';
    return kExitOk;
}

struct ReportArgs {
    std::string data = "-";
    double tolerance = ipsim::kDefaultReportToleranceMeters;
};

int run_report(const ReportArgs& args) {
    const std::vector<ipsim::DatasetRow> rows = load_dataset(args.data);
    const ipsim::PositioningReport report =
        ipsim::positioning_report(rows, args.tolerance, stem_of(args.data));
    std::cout << ipsim::report_to_json_text(report) << '\n';
    return kExitOk;
}

struct BenchArgs {
    bool all = false;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    double sigma = 2.0;
};

int run_bench_cmd(const BenchArgs& args) {
    ipsim::BenchOptions options;
    options.seed = args.seed.value_or(default_seed());
    options.threads = args.threads;
    options.sigma_db = args.sigma;
    std::cout << ipsim::run_bench(options);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wi-Fi RSSI indoor-positioning simulator and proximity toolkit"};
    app.require_subcommand(1);

    CalibrateArgs calibrate_args;
    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "Fit per-access-point path-loss parameters from RSSI recordings");
    calibrate
        ->add_option("--samples", calibrate_args.samples,
                     "Two sample CSVs: the 1 m recording, then the known-distance recording")
        ->expected(2)
        ->required();
    calibrate->add_option("--known-distance", calibrate_args.known_distance,
                          "Distance of the second recording, meters")
        ->required();
    calibrate->add_option("--estimator", calibrate_args.estimator, "mean (default) or median")
        ->check(CLI::IsMember({"mean", "median"}));

    SimulateArgs simulate_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Run a scenario and emit the labeled dataset CSV");
    simulate->add_option("--scenario", simulate_args.scenario,
                         "Builtin name (stationary, scenario1..3) or scenario JSON path");
    simulate->add_option("--seed", simulate_args.seed, "Base seed (IPS_SIM_SEED fallback)");
    simulate->add_option("--sigma", simulate_args.sigma, "RSSI noise stddev, dB");
    simulate->add_option("--out", simulate_args.out_path, "Dataset CSV path (default stdout)");
    simulate->add_flag("--net", simulate_args.net,
                       "Route reports through the lossy datagram channel and server");
    simulate->add_option("--signals", simulate_args.signals_path,
                         "NavSignal JSON-lines path (with --net)");
    simulate->add_option("--positions", simulate_args.positions_path,
                         "Estimated position stream CSV path");
    simulate->add_option("--drop", simulate_args.drop, "Channel drop probability [0,1)");
    simulate->add_option("--latency", simulate_args.latency, "Channel latency, ticks");
    simulate->add_option("--staleness", simulate_args.staleness,
                         "Server staleness horizon, ticks");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train a proximity classifier on a dataset");
    train->add_option("--data", train_args.data, "Dataset CSV path or - for stdin");
    train->add_option("--model", train_args.model, "lr, sgd or svc")->required();
    train->add_option("--out", train_args.out_path, "Model JSON output path");
    train->add_option("--seed", train_args.seed, "Split/shuffle seed (IPS_SIM_SEED fallback)");
    train->add_option("--train-fraction", train_args.train_fraction,
                      "Training fraction in (0,1), default 0.8");

    EvaluateArgs evaluate_args;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Evaluate a stored model against a dataset");
    evaluate->add_option("--data", evaluate_args.data, "Dataset CSV path or - for stdin");
    evaluate->add_option("--model-file", evaluate_args.model_file, "Model JSON path")->required();

    ReportArgs report_args;
    CLI::App* report =
        app.add_subcommand("report", "Positioning accuracy report from a dataset");
    report->add_option("--data", report_args.data, "Dataset CSV path or - for stdin");
    report->add_option("--tolerance", report_args.tolerance,
                       "Deviation tolerance for the accuracy percentage, meters");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand(
        "bench", "All builtin scenarios crossed with all classifiers, as CSV");
    bench->add_flag("--all", bench_args.all, "Run the full scenario/model grid")->required();
    bench->add_option("--seed", bench_args.seed, "Base seed (IPS_SIM_SEED fallback)");
    bench->add_option("--threads", bench_args.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    bench->add_option("--sigma", bench_args.sigma, "RSSI noise stddev, dB");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*calibrate) return run_calibrate(calibrate_args);
        if (*simulate) return run_simulate(simulate_args);
        if (*train) return run_train(train_args);
        if (*evaluate) return run_evaluate(evaluate_args);
        if (*report) return run_report(report_args);
        if (*bench) return run_bench_cmd(bench_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
