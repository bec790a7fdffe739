#include "ipsim/dataset.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "textio.hpp"

namespace ipsim {

namespace {

DatasetRow make_row(const GroundTruthFrame& truth, const DistanceVector& human,
                    const DistanceVector& robot, double hx, double hy, double rx, double ry,
                    double sep_est) {
    DatasetRow row;
    row.timestamp = truth.timestamp;
    row.hd1 = human.d1;
    row.hd2 = human.d2;
    row.hd3 = human.d3;
    row.rd1 = robot.d1;
    row.rd2 = robot.d2;
    row.rd3 = robot.d3;
    row.hx_est = hx;
    row.hy_est = hy;
    row.rx_est = rx;
    row.ry_est = ry;
    row.sep_est = sep_est;
    row.hx_true = truth.human_true.x;
    row.hy_true = truth.human_true.y;
    row.rx_true = truth.robot_true.x;
    row.ry_true = truth.robot_true.y;
    row.sep_true = truth.true_separation;
    row.label = truth.true_label;
    return row;
}

}  // namespace

std::vector<DatasetRow> dataset_from_run(const ScenarioRun& run) {
    std::vector<DatasetRow> rows;
    rows.reserve(run.truth.size());
    for (std::size_t i = 0; i < run.truth.size(); ++i) {
        const EstimatedFrame& est = run.estimates[i];
        rows.push_back(make_row(run.truth[i], run.measurements[i].first,
                                run.measurements[i].second, est.human_est.x, est.human_est.y,
                                est.robot_est.x, est.robot_est.y, est.sep_est));
    }
    return rows;
}

std::vector<DatasetRow> dataset_from_net_run(const ScenarioRun& run, const NetRunResult& net) {
    if (net.outputs.size() != run.truth.size()) {
        throw std::invalid_argument("net run and scenario run must cover the same ticks");
    }
    std::vector<DatasetRow> rows;
    rows.reserve(net.outputs.size());
    for (std::size_t i = 0; i < net.outputs.size(); ++i) {
        const ServerOutput& out = net.outputs[i];
        if (!out.signal || !out.human || !out.robot) continue;
        rows.push_back(make_row(run.truth[i], run.measurements[i].first,
                                run.measurements[i].second, out.human->x, out.human->y,
                                out.robot->x, out.robot->y, out.signal->separation_est));
    }
    return rows;
}

void write_dataset_csv(std::ostream& out, const std::vector<DatasetRow>& rows) {
    out << kDatasetCsvHeader << '\n';
    for (const DatasetRow& r : rows) {
        const double values[17] = {r.timestamp, r.hd1,     r.hd2,     r.hd3,    r.rd1,
                                   r.rd2,       r.rd3,     r.hx_est,  r.hy_est, r.rx_est,
                                   r.ry_est,    r.sep_est, r.hx_true, r.hy_true, r.rx_true,
                                   r.ry_true,   r.sep_true};
        for (double v : values) out << textio::format_double(v) << ',';
        out << r.label << '\n';
    }
}

std::vector<DatasetRow> read_dataset_csv(std::istream& in) {
    std::vector<DatasetRow> rows;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = textio::trim(line);
        if (trimmed.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (trimmed == kDatasetCsvHeader) continue;
            throw std::runtime_error("dataset CSV header mismatch; expected '" +
                                     std::string(kDatasetCsvHeader) + "'");
        }
        const auto fields = textio::split_fields(trimmed);
        if (fields.size() != 18) {
            throw std::runtime_error("dataset CSV line " + std::to_string(line_no) +
                                     ": expected 18 fields, got " +
                                     std::to_string(fields.size()));
        }
        DatasetRow r;
        std::size_t k = 0;
        for (double* slot : {&r.timestamp, &r.hd1, &r.hd2, &r.hd3, &r.rd1, &r.rd2, &r.rd3,
                             &r.hx_est, &r.hy_est, &r.rx_est, &r.ry_est, &r.sep_est, &r.hx_true,
                             &r.hy_true, &r.rx_true, &r.ry_true, &r.sep_true}) {
            *slot = textio::parse_double(fields[k], "dataset column");
            ++k;
        }
        const long long label = textio::parse_int(fields[17], "label");
        if (label != 0 && label != 1) {
            throw std::runtime_error("dataset CSV line " + std::to_string(line_no) +
                                     ": label must be 0 or 1");
        }
        r.label = static_cast<int>(label);
        rows.push_back(r);
    }
    if (!header_seen) {
        throw std::runtime_error("dataset CSV is empty");
    }
    return rows;
}

FeatureRow feature_row(const DatasetRow& row) {
    FeatureRow r;
    r.features = {row.hd1,    row.hd2,    row.hd3,    row.rd1,    row.rd2,   row.rd3,
                  row.hx_est, row.hy_est, row.rx_est, row.ry_est, row.sep_est};
    r.label = row.label;
    return r;
}

std::vector<FeatureRow> feature_rows(const std::vector<DatasetRow>& rows) {
    std::vector<FeatureRow> out;
    out.reserve(rows.size());
    for (const DatasetRow& row : rows) out.push_back(feature_row(row));
    return out;
}

}  // namespace ipsim
