#include "ipsim/ml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "ipsim/rng.hpp"

namespace ipsim {

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "lr") return ModelKind::Lr;
    if (s == "sgd") return ModelKind::SgdHinge;
    if (s == "svc") return ModelKind::LinearSvc;
    throw std::invalid_argument("unknown model kind '" + std::string(s) +
                                "' (expected lr, sgd or svc)");
}

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Lr: return "lr";
        case ModelKind::SgdHinge: return "sgd";
        case ModelKind::LinearSvc: return "svc";
    }
    return "lr";
}

std::vector<double> Scaler::transform(const std::vector<double>& x) const {
    if (x.size() != mean.size()) {
        throw std::invalid_argument("feature dimension mismatch: model expects " +
                                    std::to_string(mean.size()) + ", got " +
                                    std::to_string(x.size()));
    }
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = (x[i] - mean[i]) / stddev[i];
    }
    return z;
}

Scaler fit_scaler(const std::vector<FeatureRow>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("cannot fit a scaler on an empty dataset");
    }
    const std::size_t dim = rows.front().features.size();
    Scaler scaler;
    scaler.mean.assign(dim, 0.0);
    scaler.stddev.assign(dim, 0.0);
    const double n = static_cast<double>(rows.size());
    for (const FeatureRow& row : rows) {
        for (std::size_t i = 0; i < dim; ++i) scaler.mean[i] += row.features[i];
    }
    for (std::size_t i = 0; i < dim; ++i) scaler.mean[i] /= n;
    for (const FeatureRow& row : rows) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double delta = row.features[i] - scaler.mean[i];
            scaler.stddev[i] += delta * delta;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        scaler.stddev[i] = std::sqrt(scaler.stddev[i] / n);
        if (scaler.stddev[i] == 0.0) scaler.stddev[i] = 1.0;  // constant column
    }
    return scaler;
}

TrainConfig default_train_config(ModelKind kind) {
    TrainConfig config;
    switch (kind) {
        case ModelKind::Lr:
            config.learning_rate = 0.1;
            config.epochs = 500;
            config.l2_lambda = 1e-4;
            break;
        case ModelKind::SgdHinge:
            config.learning_rate = 0.01;
            config.epochs = 50;
            config.l2_lambda = 1e-4;
            break;
        case ModelKind::LinearSvc:
            config.learning_rate = 0.01;
            config.epochs = 500;
            config.c_param = 1.0;
            break;
    }
    return config;
}

namespace {

double dot(const std::vector<double>& w, const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void validate_train_config(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("learning_rate must be > 0");
    }
    if (config.epochs < 1) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
}

}  // namespace

double logloss_objective(const std::vector<double>& w, double b,
                         const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                         double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double z = -ys[i] * (dot(w, xs[i]) + b);
        // ln(1 + exp(z)) without overflow.
        loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    }
    loss /= static_cast<double>(xs.size());
    return loss + lambda * dot(w, w);
}

void logloss_gradient(const std::vector<double>& w, double b,
                      const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                      double lambda, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = ys[i];
        const double s = dot(w, xs[i]) + b;
        const double g = -y * sigmoid(-y * s);
        for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] += g * xs[i][k];
        grad_b += g;
    }
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] = grad_w[k] * inv_n + 2.0 * lambda * w[k];
    grad_b *= inv_n;
}

double squared_hinge_objective(const std::vector<double>& w, double b,
                               const std::vector<std::vector<double>>& xs,
                               const std::vector<int>& ys, double c) {
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double h = std::max(0.0, 1.0 - ys[i] * (dot(w, xs[i]) + b));
        loss += h * h;
    }
    loss = c * loss / static_cast<double>(xs.size());
    return 0.5 * dot(w, w) + loss;
}

void squared_hinge_gradient(const std::vector<double>& w, double b,
                            const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                            double c, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = ys[i];
        const double h = std::max(0.0, 1.0 - y * (dot(w, xs[i]) + b));
        if (h > 0.0) {
            const double g = -2.0 * h * y;
            for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] += g * xs[i][k];
            grad_b += g;
        }
    }
    const double scale = c / static_cast<double>(xs.size());
    for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] = w[k] + scale * grad_w[k];
    grad_b *= scale;
}

LinearModel train(const std::vector<FeatureRow>& rows, ModelKind kind, const TrainConfig& config) {
    if (rows.empty()) {
        throw std::invalid_argument("training requires a non-empty dataset");
    }
    validate_train_config(config);
    const std::size_t dim = rows.front().features.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].features.size() != dim) {
            throw std::invalid_argument("row " + std::to_string(i) +
                                        " has inconsistent feature dimension");
        }
        for (double v : rows[i].features) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("non-finite feature value in row " +
                                            std::to_string(i));
            }
        }
        if (rows[i].label != 0 && rows[i].label != 1) {
            throw std::invalid_argument("label in row " + std::to_string(i) + " must be 0 or 1");
        }
    }

    LinearModel model;
    model.kind = kind;
    model.scaler = fit_scaler(rows);
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;

    bool has_pos = false, has_neg = false;
    for (const FeatureRow& row : rows) {
        (row.label == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        // Single-class input: constant predictor for the class that is there.
        model.single_class_warning = true;
        model.bias = has_pos ? 1.0 : -1.0;
        return model;
    }

    std::vector<std::vector<double>> xs;
    xs.reserve(rows.size());
    std::vector<int> ys;
    ys.reserve(rows.size());
    for (const FeatureRow& row : rows) {
        xs.push_back(model.scaler.transform(row.features));
        ys.push_back(row.label == 1 ? 1 : -1);
    }

    std::vector<double>& w = model.weights;
    double& b = model.bias;

    if (kind == ModelKind::Lr) {
        std::vector<double> grad_w;
        double grad_b = 0.0;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            logloss_gradient(w, b, xs, ys, config.l2_lambda, grad_w, grad_b);
            for (std::size_t k = 0; k < dim; ++k) w[k] -= config.learning_rate * grad_w[k];
            b -= config.learning_rate * grad_b;
        }
    } else if (kind == ModelKind::SgdHinge) {
        Rng rng(config.seed);
        std::vector<std::size_t> order(xs.size());
        std::iota(order.begin(), order.end(), 0);
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            // Fisher-Yates reshuffle each epoch.
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                std::swap(order[i], order[rng.bounded(i + 1)]);
            }
            for (std::size_t idx : order) {
                const double y = ys[idx];
                const double margin = y * (dot(w, xs[idx]) + b);
                for (std::size_t k = 0; k < dim; ++k) {
                    double g = 2.0 * config.l2_lambda * w[k];
                    if (margin < 1.0) g -= y * xs[idx][k];
                    w[k] -= config.learning_rate * g;
                }
                if (margin < 1.0) b += config.learning_rate * y;
            }
        }
    } else {
        std::vector<double> grad_w;
        double grad_b = 0.0;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            squared_hinge_gradient(w, b, xs, ys, config.c_param, grad_w, grad_b);
            for (std::size_t k = 0; k < dim; ++k) w[k] -= config.learning_rate * grad_w[k];
            b -= config.learning_rate * grad_b;
        }
    }
    return model;
}

Prediction predict(const LinearModel& model, const std::vector<double>& features) {
    const std::vector<double> z = model.scaler.transform(features);
    const double s = dot(model.weights, z) + model.bias;
    Prediction p;
    if (model.kind == ModelKind::Lr) {
        p.score = sigmoid(s);
        p.label = p.score > 0.5 ? 1 : 0;
    } else {
        p.score = s;
        p.label = s > 0.0 ? 1 : 0;
    }
    return p;
}

EvalMetrics evaluate(const LinearModel& model, const std::vector<FeatureRow>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("evaluation requires a non-empty dataset");
    }
    EvalMetrics m;
    for (const FeatureRow& row : rows) {
        const int predicted = predict(model, row.features).label;
        if (predicted == 1 && row.label == 1) ++m.tp;
        if (predicted == 1 && row.label == 0) ++m.fp;
        if (predicted == 0 && row.label == 0) ++m.tn;
        if (predicted == 0 && row.label == 1) ++m.fn;
    }
    const double total = static_cast<double>(rows.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / total;
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    } else {
        m.degenerate = true;
    }
    if (m.tp + m.fn > 0) {
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> split(
    const std::vector<FeatureRow>& rows, double train_fraction, std::uint64_t seed) {
    const std::size_t n = rows.size();
    if (n < 2) {
        throw std::invalid_argument("splitting requires at least 2 rows");
    }
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    const std::size_t target_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (target_train == 0 || target_train >= n) {
        throw std::invalid_argument("split leaves fewer than 1 row in a partition");
    }

    Rng rng(seed);
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < n; ++i) {
        (rows[i].label == 1 ? pos_idx : neg_idx).push_back(i);
    }

    auto shuffle = [&rng](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[rng.bounded(i)]);
        }
    };

    std::vector<std::size_t> train_idx;
    if (pos_idx.empty() || neg_idx.empty()) {
        // Single class: plain shuffled split.
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        shuffle(all);
        train_idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(target_train));
    } else {
        // Stratified: per-class floor, remainder by largest fractional part,
        // keeping each class count within one row of the global fraction.
        shuffle(neg_idx);
        shuffle(pos_idx);
        const double f = train_fraction;
        std::size_t take_neg = static_cast<std::size_t>(
            std::floor(f * static_cast<double>(neg_idx.size())));
        std::size_t take_pos = static_cast<std::size_t>(
            std::floor(f * static_cast<double>(pos_idx.size())));
        double rem_neg = f * static_cast<double>(neg_idx.size()) - static_cast<double>(take_neg);
        double rem_pos = f * static_cast<double>(pos_idx.size()) - static_cast<double>(take_pos);
        while (take_neg + take_pos < target_train) {
            const bool neg_ok = take_neg < neg_idx.size();
            const bool pos_ok = take_pos < pos_idx.size();
            if (neg_ok && (!pos_ok || rem_neg >= rem_pos)) {
                ++take_neg;
                rem_neg -= 1.0;
            } else {
                ++take_pos;
                rem_pos -= 1.0;
            }
        }
        train_idx.insert(train_idx.end(), neg_idx.begin(),
                         neg_idx.begin() + static_cast<std::ptrdiff_t>(take_neg));
        train_idx.insert(train_idx.end(), pos_idx.begin(),
                         pos_idx.begin() + static_cast<std::ptrdiff_t>(take_pos));
    }

    std::vector<bool> in_train(n, false);
    for (std::size_t i : train_idx) in_train[i] = true;
    std::pair<std::vector<FeatureRow>, std::vector<FeatureRow>> parts;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? parts.first : parts.second).push_back(rows[i]);
    }
    return parts;
}

namespace {
using nlohmann::json;
}

std::string model_to_json_text(const LinearModel& model) {
    json j;
    j["kind"] = to_string(model.kind);
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["scaler_mean"] = model.scaler.mean;
    j["scaler_std"] = model.scaler.stddev;
    if (model.single_class_warning) j["single_class_warning"] = true;
    return j.dump(2);
}

LinearModel model_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    LinearModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
    model.scaler.stddev = j.at("scaler_std").get<std::vector<double>>();
    model.single_class_warning = j.value("single_class_warning", false);
    if (model.weights.size() != model.scaler.mean.size() ||
        model.weights.size() != model.scaler.stddev.size()) {
        throw std::invalid_argument("model JSON has inconsistent weight/scaler dimensions");
    }
    for (double s : model.scaler.stddev) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("model JSON scaler_std entries must be > 0");
        }
    }
    return model;
}

std::string metrics_to_json_text(const EvalMetrics& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["degenerate"] = m.degenerate;
    return j.dump(2);
}

}  // namespace ipsim
