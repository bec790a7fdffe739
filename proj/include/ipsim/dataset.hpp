#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ipsim/ml.hpp"
#include "ipsim/netsim.hpp"
#include "ipsim/scenario.hpp"

namespace ipsim {

// One labeled dataset row, mirroring the CSV schema. Column names follow
// the H-D1..R-D3 feature naming.
struct DatasetRow {
    double timestamp = 0.0;
    double hd1 = 0.0, hd2 = 0.0, hd3 = 0.0;
    double rd1 = 0.0, rd2 = 0.0, rd3 = 0.0;
    double hx_est = 0.0, hy_est = 0.0;
    double rx_est = 0.0, ry_est = 0.0;
    double sep_est = 0.0;
    double hx_true = 0.0, hy_true = 0.0;
    double rx_true = 0.0, ry_true = 0.0;
    double sep_true = 0.0;
    int label = 0;  // from the true separation
};

inline constexpr const char* kDatasetCsvHeader =
    "timestamp,hd1,hd2,hd3,rd1,rd2,rd3,hx_est,hy_est,rx_est,ry_est,sep_est,"
    "hx_true,hy_true,rx_true,ry_true,sep_true,label";

std::vector<DatasetRow> dataset_from_run(const ScenarioRun& run);

// Networked pipeline rows: features and estimates come from the server's
// outputs, truth from the scenario clock. Ticks without a server fix (lost
// beyond the staleness horizon) produce no row.
std::vector<DatasetRow> dataset_from_net_run(const ScenarioRun& run, const NetRunResult& net);

// Doubles are written shortest-round-trip, so written values reload exactly.
void write_dataset_csv(std::ostream& out, const std::vector<DatasetRow>& rows);
std::vector<DatasetRow> read_dataset_csv(std::istream& in);

// The 11 estimation-side features plus the truth-derived label.
FeatureRow feature_row(const DatasetRow& row);
std::vector<FeatureRow> feature_rows(const std::vector<DatasetRow>& rows);

}  // namespace ipsim
