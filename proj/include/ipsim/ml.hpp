#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ipsim {

// Estimation-side feature vector: hd1..hd3, rd1..rd3, hx_est, hy_est,
// rx_est, ry_est, sep_est. Ground truth is used only for the label.
inline constexpr std::size_t kFeatureCount = 11;

struct FeatureRow {
    std::vector<double> features;
    int label = 0;  // 1 = close (< 0.5 m), 0 = safe
};

enum class ModelKind { Lr, SgdHinge, LinearSvc };

ModelKind model_kind_from_string(std::string_view s);  // "lr" | "sgd" | "svc"
const char* to_string(ModelKind kind);

// Per-feature standardization fitted on the training rows. Constant columns
// keep std 1 so they pass through unscaled.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::vector<double> transform(const std::vector<double>& x) const;
};

Scaler fit_scaler(const std::vector<FeatureRow>& rows);

struct LinearModel {
    ModelKind kind = ModelKind::Lr;
    std::vector<double> weights;
    double bias = 0.0;
    Scaler scaler;
    bool single_class_warning = false;  // trained on one class: constant predictor
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2_lambda = 1e-4;  // LR and SGD penalty
    double c_param = 1.0;     // SVC hinge weight
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
};

// Converged defaults for desk-scale datasets:
//   lr    rate 0.1,  500 epochs, lambda 1e-4, full-batch log-loss descent
//   sgd   rate 0.01,  50 epochs, lambda 1e-4, per-sample hinge subgradient
//   svc   rate 0.01, 500 epochs, C 1.0, batch squared-hinge subgradient
TrainConfig default_train_config(ModelKind kind);

// Standardizes with statistics of the given rows, then fits the selected
// objective. Single-class input yields a constant predictor with
// single_class_warning set. Throws on empty input or non-finite features.
LinearModel train(const std::vector<FeatureRow>& rows, ModelKind kind, const TrainConfig& config);

struct Prediction {
    int label = 0;
    double score = 0.0;  // probability for LR, signed margin for hinge models
};

// Score ties at the decision boundary (margin 0, probability 0.5) resolve
// to label 0, matching the safe side of the proximity threshold.
Prediction predict(const LinearModel& model, const std::vector<double>& features);

struct EvalMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    bool degenerate = false;  // some ratio had a zero denominator
};

EvalMetrics evaluate(const LinearModel& model, const std::vector<FeatureRow>& rows);

// Seeded shuffle + partition, stratified by label when both classes are
// present. Both partitions keep at least one row.
std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split(
    const std::vector<FeatureRow>& rows, double train_fraction, std::uint64_t seed);

// Objectives over standardized features with labels in {-1,+1}, exposed so
// the analytic gradients can be checked against finite differences.
//   log-loss:       mean_i ln(1 + exp(-y_i s_i)) + lambda * |w|^2
//   squared hinge:  0.5 |w|^2 + c * mean_i max(0, 1 - y_i s_i)^2
double logloss_objective(const std::vector<double>& w, double b,
                         const std::vector<std::vector<double>>& xs,
                         const std::vector<int>& ys, double lambda);
void logloss_gradient(const std::vector<double>& w, double b,
                      const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                      double lambda, std::vector<double>& grad_w, double& grad_b);
double squared_hinge_objective(const std::vector<double>& w, double b,
                               const std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys, double c);
void squared_hinge_gradient(const std::vector<double>& w, double b,
                            const std::vector<std::vector<double>>& xs,
                            const std::vector<int>& ys, double c,
                            std::vector<double>& grad_w, double& grad_b);

// Model JSON: {kind, weights[], bias, scaler_mean[], scaler_std[]}.
std::string model_to_json_text(const LinearModel& model);
LinearModel model_from_json_text(const std::string& text);

std::string metrics_to_json_text(const EvalMetrics& metrics);

}  // namespace ipsim
