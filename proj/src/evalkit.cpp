#include "ipsim/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "ipsim/rng.hpp"
#include "textio.hpp"

namespace ipsim {

PositioningReport positioning_report(std::span<const double> sep_est,
                                     std::span<const double> sep_true, double tolerance_m,
                                     std::string scenario_name) {
    if (sep_est.size() != sep_true.size()) {
        throw std::invalid_argument("estimated and true separation series differ in length");
    }
    if (sep_est.empty()) {
        throw std::invalid_argument("positioning report needs at least one frame");
    }
    if (!(tolerance_m >= 0.0)) {
        throw std::invalid_argument("tolerance must be >= 0");
    }
    PositioningReport report;
    report.scenario = std::move(scenario_name);
    report.n_frames = sep_est.size();
    report.tolerance_m = tolerance_m;
    report.deviations.reserve(sep_est.size());
    double sum = 0.0;
    std::size_t within = 0;
    for (std::size_t i = 0; i < sep_est.size(); ++i) {
        const double dev = std::abs(sep_est[i] - sep_true[i]);
        report.deviations.push_back(dev);
        sum += dev;
        if (dev <= tolerance_m) ++within;
    }
    report.avg_deviation_m = sum / static_cast<double>(sep_est.size());
    report.accuracy_pct =
        100.0 * static_cast<double>(within) / static_cast<double>(sep_est.size());
    return report;
}

PositioningReport positioning_report(const std::vector<DatasetRow>& rows, double tolerance_m,
                                     std::string scenario_name) {
    std::vector<double> est, truth;
    est.reserve(rows.size());
    truth.reserve(rows.size());
    for (const DatasetRow& r : rows) {
        est.push_back(r.sep_est);
        truth.push_back(r.sep_true);
    }
    return positioning_report(est, truth, tolerance_m, std::move(scenario_name));
}

std::string report_to_json_text(const PositioningReport& report) {
    nlohmann::json j;
    j["scenario"] = report.scenario;
    j["n_frames"] = report.n_frames;
    j["avg_deviation_m"] = report.avg_deviation_m;
    j["accuracy_pct"] = report.accuracy_pct;
    j["tolerance_m"] = report.tolerance_m;
    j["deviations"] = report.deviations;
    return j.dump(2);
}

namespace {

struct BenchCell {
    PositioningReport report;
    std::array<EvalMetrics, 3> metrics;
};

constexpr std::array<ModelKind, 3> kBenchModels{ModelKind::Lr, ModelKind::SgdHinge,
                                                ModelKind::LinearSvc};

BenchCell bench_scenario(const BenchOptions& options, ScenarioSpec spec) {
    spec.noise.sigma_db = options.sigma_db;
    spec.noise.seed = derive_seed(options.seed, "bench/" + spec.name + "/noise");

    const ScenarioRun run = run_scenario(spec);
    const std::vector<DatasetRow> rows = dataset_from_run(run);

    BenchCell cell;
    cell.report = positioning_report(rows, kDefaultReportToleranceMeters, spec.name);
    cell.report.deviations.clear();  // table output only needs aggregates

    const std::vector<FeatureRow> features = feature_rows(rows);
    const auto [train_rows, test_rows] =
        split(features, options.train_fraction, derive_seed(options.seed, "bench/" + spec.name + "/split"));
    for (std::size_t m = 0; m < kBenchModels.size(); ++m) {
        TrainConfig config = default_train_config(kBenchModels[m]);
        config.train_fraction = options.train_fraction;
        config.seed = derive_seed(options.seed,
                                  "bench/" + spec.name + "/train/" + to_string(kBenchModels[m]));
        const LinearModel model = train(train_rows, kBenchModels[m], config);
        cell.metrics[m] = evaluate(model, test_rows);
    }
    return cell;
}

}  // namespace

std::string run_bench(const BenchOptions& options) {
    if (options.threads < 1) {
        throw std::invalid_argument("bench needs at least one thread");
    }
    const std::vector<ScenarioSpec> specs = builtin_scenarios();
    std::vector<BenchCell> cells(specs.size());

    // Cells are pure functions of (spec, base seed); threads only change who
    // computes what, never the bytes that come out.
    const int thread_count = std::min<int>(options.threads, static_cast<int>(specs.size()));
    if (thread_count <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            cells[i] = bench_scenario(options, specs[i]);
        }
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) {
            workers.emplace_back([&, t]() {
                for (std::size_t i = static_cast<std::size_t>(t); i < specs.size();
                     i += static_cast<std::size_t>(thread_count)) {
                    cells[i] = bench_scenario(options, specs[i]);
                }
            });
        }
        for (std::thread& w : workers) w.join();
    }

    std::ostringstream out;
    out << "scenario,model,accuracy_pct,f1_score,avg_deviation_m,positioning_accuracy_pct\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t m = 0; m < kBenchModels.size(); ++m) {
            const EvalMetrics& metrics = cells[i].metrics[m];
            out << specs[i].name << ',' << to_string(kBenchModels[m]) << ','
                << textio::format_double(100.0 * metrics.accuracy) << ','
                << textio::format_double(metrics.f1) << ','
                << textio::format_double(cells[i].report.avg_deviation_m) << ','
                << textio::format_double(cells[i].report.accuracy_pct) << '\n';
        }
    }
    return out.str();
}

}  // namespace ipsim
