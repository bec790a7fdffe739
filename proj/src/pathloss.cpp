#include "ipsim/pathloss.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "textio.hpp"

namespace ipsim {

void validate(const PathLossParams& params) {
    if (!std::isfinite(params.a_ref)) {
        throw std::invalid_argument("path-loss a_ref must be finite");
    }
    if (!std::isfinite(params.n_env) || params.n_env <= 0.0) {
        throw std::invalid_argument("path-loss exponent n_env must be > 0");
    }
}

void validate(const NoiseConfig& noise) {
    if (!std::isfinite(noise.sigma_db) || noise.sigma_db < 0.0) {
        throw std::invalid_argument("noise sigma_db must be >= 0");
    }
}

std::optional<std::string> typical_range_warning(const PathLossParams& params) {
    if (params.a_ref < -80.0 || params.a_ref > -20.0) {
        return "a_ref " + textio::format_double(params.a_ref) +
               " dBm is outside the typical [-80, -20] dBm window";
    }
    return std::nullopt;
}

double distance_to_rssi(double d, const PathLossParams& params) {
    validate(params);
    if (!std::isfinite(d) || d <= 0.0) {
        throw std::invalid_argument("distance must be > 0 (got " + textio::format_double(d) + ")");
    }
    const double clamped = std::max(d, kMinModelDistanceMeters);
    return params.a_ref - 10.0 * params.n_env * std::log10(clamped);
}

double distance_to_rssi(double d, const PathLossParams& params, double sigma_db, Rng& rng) {
    if (!std::isfinite(sigma_db) || sigma_db < 0.0) {
        throw std::invalid_argument("noise sigma_db must be >= 0");
    }
    double p = distance_to_rssi(d, params);
    if (sigma_db > 0.0) {
        p += sigma_db * rng.gaussian();
    }
    return p;
}

double rssi_to_distance(double p, const PathLossParams& params) {
    validate(params);
    if (!std::isfinite(p)) {
        throw std::invalid_argument("rssi must be finite");
    }
    // d = 10^((A - P) / (10 n))
    return std::pow(10.0, (params.a_ref - p) / (10.0 * params.n_env));
}

namespace {

double aggregate_rssi(const std::vector<RssiSample>& samples, Estimator estimator) {
    if (estimator == Estimator::Mean) {
        double sum = 0.0;
        for (const RssiSample& s : samples) sum += s.rssi;
        return sum / static_cast<double>(samples.size());
    }
    std::vector<double> values;
    values.reserve(samples.size());
    for (const RssiSample& s : samples) values.push_back(s.rssi);
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

double calibrate_a(const std::vector<RssiSample>& samples, Estimator estimator) {
    if (samples.empty()) {
        throw CalibrationError("a_ref calibration needs at least one sample");
    }
    return aggregate_rssi(samples, estimator);
}

double calibrate_n(const std::vector<RssiSample>& samples, double d_known, double a_ref,
                   Estimator estimator) {
    if (samples.empty()) {
        throw CalibrationError("exponent calibration needs at least one sample");
    }
    if (!std::isfinite(d_known) || d_known <= 0.0) {
        throw CalibrationError("exponent calibration distance must be > 0");
    }
    if (d_known == 1.0) {
        throw CalibrationError("exponent is unidentifiable at d = 1 m (log term vanishes)");
    }
    const double p = aggregate_rssi(samples, estimator);
    const double n = (a_ref - p) / (10.0 * std::log10(d_known));
    if (!(n > 0.0)) {
        throw CalibrationError("calibrated exponent " + textio::format_double(n) +
                               " violates n > 0; check the recordings");
    }
    return n;
}

std::vector<RssiSample> read_samples_csv(std::istream& in) {
    std::vector<RssiSample> samples;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = textio::trim(line);
        if (trimmed.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (trimmed == "timestamp,ap_id,rssi") continue;
            throw std::runtime_error("sample CSV must start with header 'timestamp,ap_id,rssi'");
        }
        const auto fields = textio::split_fields(trimmed);
        if (fields.size() != 3) {
            throw std::runtime_error("sample CSV line " + std::to_string(line_no) +
                                     ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        RssiSample s;
        s.timestamp = textio::parse_double(fields[0], "timestamp");
        s.ap_id = static_cast<int>(textio::parse_int(fields[1], "ap_id"));
        s.rssi = textio::parse_double(fields[2], "rssi");
        if (s.timestamp < 0.0) {
            throw std::runtime_error("sample CSV line " + std::to_string(line_no) +
                                     ": timestamp must be >= 0");
        }
        if (!std::isfinite(s.rssi)) {
            throw std::runtime_error("sample CSV line " + std::to_string(line_no) +
                                     ": rssi must be finite");
        }
        samples.push_back(s);
    }
    return samples;
}

}  // namespace ipsim
