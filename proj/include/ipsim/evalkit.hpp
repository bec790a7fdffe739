#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ipsim/dataset.hpp"

namespace ipsim {

inline constexpr double kDefaultReportToleranceMeters = 0.5;

// Positioning quality over one run: per-frame deviation
// |sep_est - sep_true|, its mean, and the percentage of frames whose
// deviation stays within the tolerance.
struct PositioningReport {
    std::string scenario;
    std::size_t n_frames = 0;
    double avg_deviation_m = 0.0;
    double accuracy_pct = 0.0;
    double tolerance_m = kDefaultReportToleranceMeters;
    std::vector<double> deviations;
};

PositioningReport positioning_report(std::span<const double> sep_est,
                                     std::span<const double> sep_true, double tolerance_m,
                                     std::string scenario_name);
PositioningReport positioning_report(const std::vector<DatasetRow>& rows, double tolerance_m,
                                     std::string scenario_name);

std::string report_to_json_text(const PositioningReport& report);

struct BenchOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    double sigma_db = 2.0;
    double train_fraction = 0.8;
};

// All four builtin scenarios crossed with all three classifiers. Output is
// CSV with header
//   scenario,model,accuracy_pct,f1_score,avg_deviation_m,positioning_accuracy_pct
// in fixed scenario/model order. Every cell derives its own seeds from the
// base seed, so the bytes are identical for any thread count.
std::string run_bench(const BenchOptions& options);

}  // namespace ipsim
