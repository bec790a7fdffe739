#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipsim/rng.hpp"

namespace ipsim {

// Log-distance path-loss model for one access point:
//   rssi(d) = a_ref - 10 * n_env * log10(d)
// a_ref is the RSSI measured 1 m from the transmitter, n_env the
// environmental attenuation exponent (about 2 in free space, higher indoors).
struct PathLossParams {
    int ap_id = 0;
    double a_ref = -45.0;  // dBm at 1 m
    double n_env = 3.0;    // dimensionless, must be > 0
};

struct RssiSample {
    double timestamp = 0.0;  // seconds since recording start
    int ap_id = 0;           // anchor id, 1..3
    double rssi = 0.0;       // dBm
};

struct NoiseConfig {
    double sigma_db = 2.0;      // stddev of zero-mean Gaussian noise, dB domain
    std::uint64_t seed = 0;
};

class CalibrationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Distances below this are clamped before the log term; a receiver cannot
// physically sit on top of an access point.
inline constexpr double kMinModelDistanceMeters = 0.01;

// Throws std::invalid_argument when n_env <= 0 or a_ref is not finite.
void validate(const PathLossParams& params);
void validate(const NoiseConfig& noise);

// Non-fatal check: a_ref outside the typical [-80, -20] dBm window.
std::optional<std::string> typical_range_warning(const PathLossParams& params);

// Exact model. d <= 0 is rejected; d in (0, 1 cm) is clamped to 1 cm.
double distance_to_rssi(double d, const PathLossParams& params);

// Model plus additive Gaussian noise drawn from the caller's stream. With
// sigma_db == 0 the stream is untouched and the result is exact.
double distance_to_rssi(double d, const PathLossParams& params, double sigma_db, Rng& rng);

// Inversion: d = 10^((a_ref - p) / (10 * n_env)). Any finite RSSI maps to a
// positive distance.
double rssi_to_distance(double p, const PathLossParams& params);

enum class Estimator { Mean, Median };

// Step one of the calibration procedure: samples recorded at d = 1 m give
// a_ref directly since the log term vanishes there.
double calibrate_a(const std::vector<RssiSample>& samples, Estimator estimator = Estimator::Mean);

// Step two: samples at a known distance with a_ref already fixed give
//   n = (a_ref - avg(rssi)) / (10 * log10(d_known)).
// d_known must be positive and different from 1 m (where n is unidentifiable),
// and the recovered exponent must come out positive.
double calibrate_n(const std::vector<RssiSample>& samples, double d_known, double a_ref,
                   Estimator estimator = Estimator::Mean);

// CSV with header "timestamp,ap_id,rssi".
std::vector<RssiSample> read_samples_csv(std::istream& in);

}  // namespace ipsim
