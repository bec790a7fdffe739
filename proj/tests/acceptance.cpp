// Acceptance suite: end-to-end checks of the whole pipeline, one line of
// output per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ipsim/dataset.hpp"
#include "ipsim/evalkit.hpp"
#include "ipsim/locator.hpp"
#include "ipsim/ml.hpp"
#include "ipsim/netsim.hpp"
#include "ipsim/pathloss.hpp"
#include "ipsim/rng.hpp"
#include "ipsim/scenario.hpp"

using namespace ipsim;

namespace {

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

bool check(bool condition, std::string& detail, const std::string& message) {
    if (!condition && detail.empty()) detail = message;
    return condition;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Path-loss round trip at 1e-9 relative accuracy.
bool criterion_roundtrip(std::string& detail) {
    Rng rng(1001);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        const PathLossParams params{1, -70.0 + 40.0 * rng.uniform(), 1.5 + 2.5 * rng.uniform()};
        const double d = 0.05 + 49.95 * rng.uniform();
        const double back = rssi_to_distance(distance_to_rssi(d, params), params);
        ok = check(std::abs(back - d) / d < 1e-9, detail,
                   "round trip off at d=" + fmt(d) + ": " + fmt(back));
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 2. Closed-form exactness on 1,000 points plus agreement between the
// damped least-squares solver and an exhaustive 1 mm grid search on biased
// ranges. The grid oracle is brute force, so it runs on a 50-point seeded
// subset to stay inside the time budget.
struct GridArgmin {
    double x, y;
};

GridArgmin grid_search_min(const std::vector<RangeMeasurement>& ms, const AnchorLayout& layout) {
    const double step = 1e-3;
    GridArgmin best{0.0, 0.0};
    double best_ssr = 1e300;
    const int nx = static_cast<int>(layout.a2_x / step) + 1;
    const int ny = static_cast<int>(layout.a3_y / step) + 1;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = iy * step;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = ix * step;
            double ssr = 0.0;
            for (const RangeMeasurement& m : ms) {
                const double dx = x - m.anchor.x;
                const double dy = y - m.anchor.y;
                const double err = std::sqrt(dx * dx + dy * dy) - m.range;
                ssr += err * err;
            }
            if (ssr < best_ssr) {
                best_ssr = ssr;
                best = {x, y};
            }
        }
    }
    return best;
}

bool criterion_trilateration(std::string& detail) {
    const AnchorLayout layout;
    Rng rng(2002);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
        const Vec2 truth{3.0 * rng.uniform(), 3.0 * rng.uniform()};
        DistanceVector d;
        d.d1 = std::max(distance(truth, layout.anchor(1)), 1e-12);
        d.d2 = std::max(distance(truth, layout.anchor(2)), 1e-12);
        d.d3 = std::max(distance(truth, layout.anchor(3)), 1e-12);
        const Position p = trilaterate(d, layout);
        ok = check(std::hypot(p.x - truth.x, p.y - truth.y) < 1e-9, detail,
                   "closed form off at (" + fmt(truth.x) + "," + fmt(truth.y) + ")");
    }
    if (!ok) return false;

    for (int i = 0; i < 50 && ok; ++i) {
        const Vec2 truth{0.2 + 2.6 * rng.uniform(), 0.2 + 2.6 * rng.uniform()};
        std::vector<RangeMeasurement> ms;
        for (int a = 1; a <= 3; ++a) {
            ms.push_back({layout.anchor(a), distance(truth, layout.anchor(a)) + 0.1});
        }
        const LsFix fix = multilaterate_ls(ms);
        const GridArgmin grid = grid_search_min(ms, layout);
        const double gap = std::hypot(fix.position.x - grid.x, fix.position.y - grid.y);
        // Within one 1 mm cell of the exhaustive argmin (cell diagonal).
        ok = check(gap <= std::sqrt(2.0) * 1e-3, detail,
                   "LS vs grid gap " + fmt(gap) + " m at (" + fmt(truth.x) + "," +
                       fmt(truth.y) + ")");
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 3. Noiseless end-to-end: direct and networked pipelines both perfect and
// mutually identical, frame for frame.
bool criterion_noiseless(std::string& detail) {
    bool ok = true;
    for (ScenarioSpec spec : builtin_scenarios()) {
        spec.noise.sigma_db = 0.0;
        const ScenarioRun direct = run_scenario(spec);
        const std::vector<DatasetRow> rows = dataset_from_run(direct);
        const PositioningReport report =
            positioning_report(rows, kDefaultReportToleranceMeters, spec.name);
        ok = ok &&
             check(report.avg_deviation_m <= 1e-9, detail,
                   spec.name + " direct avg deviation " + fmt(report.avg_deviation_m)) &&
             check(report.accuracy_pct == 100.0, detail, spec.name + " direct accuracy");

        const NetRunResult net = run_scenario_net(spec, ChannelConfig{0.0, 0, 1});
        ok = ok && check(net.outputs.size() == direct.estimates.size(), detail,
                         spec.name + " tick count mismatch");
        for (std::size_t i = 0; ok && i < net.outputs.size(); ++i) {
            ok = check(net.outputs[i].signal.has_value(), detail,
                       spec.name + " missing signal at tick " + std::to_string(i)) &&
                 check(net.outputs[i].signal->separation_est == direct.estimates[i].sep_est,
                       detail, spec.name + " net/direct mismatch at tick " + std::to_string(i));
        }
        const std::vector<DatasetRow> net_rows = dataset_from_net_run(direct, net);
        ok = ok && check(net_rows.size() == rows.size(), detail, spec.name + " net row count");
        const PositioningReport net_report =
            positioning_report(net_rows, kDefaultReportToleranceMeters, spec.name);
        ok = ok &&
             check(net_report.avg_deviation_m <= 1e-9, detail,
                   spec.name + " net avg deviation " + fmt(net_report.avg_deviation_m)) &&
             check(net_report.accuracy_pct == 100.0, detail, spec.name + " net accuracy");
        if (!ok) break;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 4. Sub-1 m deviation envelope at the default 2 dB noise over 20 seeds.
bool criterion_deviation_envelope(std::string& detail) {
    bool ok = true;
    double stationary_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
        for (ScenarioSpec spec : builtin_scenarios()) {
            spec.noise.sigma_db = 2.0;
            spec.noise.seed = derive_seed(seed, "envelope/" + spec.name);
            const std::vector<DatasetRow> rows = dataset_from_run(run_scenario(spec));
            const PositioningReport report =
                positioning_report(rows, kDefaultReportToleranceMeters, spec.name);
            ok = check(report.avg_deviation_m < 1.0, detail,
                       spec.name + " seed " + std::to_string(seed) + " avg deviation " +
                           fmt(report.avg_deviation_m));
            if (!ok) break;
            if (spec.name == "stationary") stationary_sum += report.avg_deviation_m;
        }
    }
    if (!ok) return false;
    const double stationary_mean = stationary_sum / 20.0;
    return check(stationary_mean >= 0.2 && stationary_mean <= 1.0, detail,
                 "stationary mean over seeds " + fmt(stationary_mean) + " outside [0.2, 1.0]");
}

// ---------------------------------------------------------------------------
// 5. All three classifiers perfect on a separable simulated dataset.
bool criterion_classifiers(std::string& detail) {
    // Collision runs at low noise, with a dead band around the threshold so
    // the classes stand apart cleanly.
    std::vector<DatasetRow> rows;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        ScenarioSpec spec = builtin_scenario("scenario3");
        spec.noise.sigma_db = 0.25;
        spec.noise.seed = derive_seed(seed, "classifier/dataset");
        for (const DatasetRow& row : dataset_from_run(run_scenario(spec))) {
            if (row.sep_true >= 0.25 && row.sep_true <= 0.75) continue;
            rows.push_back(row);
        }
    }
    const std::vector<FeatureRow> features = feature_rows(rows);

    // The margin claim: classes separate along standardized sep_est.
    double max_pos = -1e300, min_neg = 1e300, mean = 0.0, var = 0.0;
    for (const FeatureRow& f : features) mean += f.features[10];
    mean /= static_cast<double>(features.size());
    for (const FeatureRow& f : features) {
        var += (f.features[10] - mean) * (f.features[10] - mean);
        if (f.label == 1) max_pos = std::max(max_pos, f.features[10]);
        if (f.label == 0) min_neg = std::min(min_neg, f.features[10]);
    }
    var /= static_cast<double>(features.size());
    const double margin = 0.5 * (min_neg - max_pos) / std::sqrt(var);
    bool ok = check(margin >= 0.1, detail, "standardized margin " + fmt(margin) + " below 0.1");
    if (!ok) return false;

    const auto [train_rows, test_rows] = split(features, 0.8, 91);
    for (ModelKind kind : {ModelKind::Lr, ModelKind::SgdHinge, ModelKind::LinearSvc}) {
        TrainConfig config = default_train_config(kind);
        config.seed = 92;
        const LinearModel model = train(train_rows, kind, config);
        const EvalMetrics metrics = evaluate(model, test_rows);
        ok = ok &&
             check(metrics.accuracy == 1.0, detail,
                   std::string(to_string(kind)) + " test accuracy " + fmt(metrics.accuracy)) &&
             check(metrics.f1 == 1.0, detail,
                   std::string(to_string(kind)) + " test F1 " + fmt(metrics.f1));
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 6. Analytic gradients against central finite differences at 100 points.
bool criterion_gradients(std::string& detail) {
    Rng rng(6006);
    const std::size_t n = 40, dim = 11;
    std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
    std::vector<int> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : xs[i]) v = 2.0 * rng.uniform() - 1.0;
        ys[i] = rng.bounded(2) == 0 ? -1 : 1;
    }
    const double h = 1e-6;
    bool ok = true;
    for (int point = 0; point < 100 && ok; ++point) {
        std::vector<double> w(dim);
        for (double& v : w) v = 2.0 * rng.uniform() - 1.0;
        const double b = 2.0 * rng.uniform() - 1.0;
        for (int which = 0; which < 2 && ok; ++which) {
            auto objective = [&](const std::vector<double>& wv, double bv) {
                return which == 0 ? logloss_objective(wv, bv, xs, ys, 1e-4)
                                  : squared_hinge_objective(wv, bv, xs, ys, 1.0);
            };
            std::vector<double> grad_w;
            double grad_b = 0.0;
            if (which == 0) {
                logloss_gradient(w, b, xs, ys, 1e-4, grad_w, grad_b);
            } else {
                squared_hinge_gradient(w, b, xs, ys, 1.0, grad_w, grad_b);
            }
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k <= dim; ++k) {
                std::vector<double> wp = w, wm = w;
                double bp = b, bm = b;
                if (k < dim) {
                    wp[k] += h;
                    wm[k] -= h;
                } else {
                    bp += h;
                    bm -= h;
                }
                const double fd = (objective(wp, bp) - objective(wm, bm)) / (2.0 * h);
                const double an = k < dim ? grad_w[k] : grad_b;
                num += (an - fd) * (an - fd);
                den += fd * fd;
            }
            const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
            ok = check(rel < 1e-5, detail,
                       std::string(which == 0 ? "log-loss" : "squared-hinge") +
                           " gradient relative error " + fmt(rel));
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 7. Wire protocol: exact round trips and single-bit corruption detection.
bool criterion_protocol(std::string& detail) {
    Rng rng(7007);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        DistanceReport r;
        r.node_id = rng.bounded(2) == 0 ? 1 : 2;
        r.seq = static_cast<std::uint32_t>(rng.next_u64());
        r.timestamp_ms = rng.next_u64() >> 16;
        r.d1 = 50.0 * rng.uniform();
        r.d2 = 50.0 * rng.uniform();
        r.d3 = 50.0 * rng.uniform();
        ok = check(decode_report(encode_report(r)) == r, detail,
                   "round trip failed at frame " + std::to_string(i));
    }
    if (!ok) return false;

    const ReportFrame reference =
        encode_report(DistanceReport{1, 77, 1300, 1.0, 2.0, 2.23606797749979});
    for (std::size_t byte = 0; byte < kReportFrameSize && ok; ++byte) {
        for (int bit = 0; bit < 8 && ok; ++bit) {
            ReportFrame corrupted = reference;
            corrupted[byte] ^= static_cast<std::uint8_t>(1u << bit);
            bool rejected = false;
            try {
                (void)decode_report(corrupted);
            } catch (const CorruptionError&) {
                rejected = true;
            }
            ok = check(rejected, detail,
                       "bit flip " + std::to_string(byte) + ":" + std::to_string(bit) +
                           " slipped through");
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 8. Loss resilience: signal on at least 95% of ticks at 20% drop rate.
bool criterion_loss_resilience(std::string& detail) {
    ScenarioSpec spec = builtin_scenario("stationary");
    spec.duration = 120.0;  // 1201 ticks
    spec.noise.sigma_db = 2.0;
    spec.noise.seed = 808;
    const NetRunResult net = run_scenario_net(spec, ChannelConfig{0.2, 0, 4242});
    if (!check(net.outputs.size() >= 1000, detail, "fewer than 1000 ticks")) return false;
    return check(net.signal_rate() >= 0.95, detail,
                 "signal rate " + fmt(net.signal_rate()) + " below 0.95");
}

// ---------------------------------------------------------------------------
// 9. bench --all --seed 7: identical bytes across runs and thread counts.
bool criterion_bench_determinism(std::string& detail) {
    BenchOptions options;
    options.seed = 7;
    options.threads = 1;
    const std::string first = run_bench(options);
    const std::string second = run_bench(options);
    options.threads = 4;
    const std::string threaded = run_bench(options);
    return check(first == second, detail, "repeated runs differ") &&
           check(first == threaded, detail, "thread counts change the output") &&
           check(!first.empty(), detail, "bench produced no output");
}

// ---------------------------------------------------------------------------
// 10. Frame accounting: 90 s at 100 ms is 901 frames.
bool criterion_frame_accounting(std::string& detail) {
    ScenarioSpec spec = builtin_scenario("stationary");
    spec.noise.sigma_db = 0.0;
    const ScenarioRun run = run_scenario(spec);
    return check(frame_count(90.0, 0.1) == 901, detail,
                 "frame_count(90, 0.1) = " + std::to_string(frame_count(90.0, 0.1))) &&
           check(run.truth.size() == 901, detail,
                 "stationary run has " + std::to_string(run.truth.size()) + " frames") &&
           check(run.truth.size() > 900, detail, "fewer than 900 samples");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "path-loss round trip (10k triples, 1e-9 relative)", 1.0, criterion_roundtrip},
        {2, "trilateration exactness + grid-search oracle", 30.0, criterion_trilateration},
        {3, "noiseless end-to-end, direct == net", 5.0, criterion_noiseless},
        {4, "sub-1 m deviation envelope over 20 seeds", 10.0, criterion_deviation_envelope},
        {5, "classifier perfection on separable data", 5.0, criterion_classifiers},
        {6, "gradient oracle (100 random points)", 1.0, criterion_gradients},
        {7, "protocol round trip + single-bit corruption", 1.0, criterion_protocol},
        {8, "signal rate >= 95% at 20% drop", 1.0, criterion_loss_resilience},
        {9, "bench determinism across runs and threads", 30.0, criterion_bench_determinism},
        {10, "frame accounting: 901 frames at 90 s / 100 ms", 1.0, criterion_frame_accounting},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.budget_seconds) {
            ok = false;
            if (detail.empty()) {
                detail = "exceeded " + fmt(criterion.budget_seconds) + " s budget";
            }
        }
        std::printf("[%s] criterion %2d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, elapsed);
        if (!ok) {
            std::printf("       %s\n", detail.c_str());
            ++failures;
        }
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}
