#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lifi/geometry.hpp"

namespace lifi {

enum class NoiseFamily { gaussian, laplace };

/// Harmonic random process in white noise: x(t) = A sin(2 pi f t + phi) + v(t)
/// with phi uniform and v i.i.d. from the noise family.  Angles in degrees.
struct OrientationProcessParams {
  double amplitude_deg = 0.0;        // A
  double frequency_hz = 1.0;         // f
  double process_noise_deg = 0.0;    // sigma_v
  double mean_deg = 0.0;             // mu (theta) or direction (omega)
  double measurement_noise_var = 0;  // sigma_n^2, deg^2
  NoiseFamily family = NoiseFamily::gaussian;

  double process_variance() const {
    return process_noise_deg * process_noise_deg +
           0.5 * amplitude_deg * amplitude_deg;
  }
};

/// Measurement-noise variances observed with the sensors idle, in dB-degree.
inline constexpr double kPolarNoiseVarDb = -29.71;
inline constexpr double kAzimuthNoiseVarDb = 0.11;

/// Fitted per-activity parameters for the polar angle process.
OrientationProcessParams polar_process_params(Activity a);
/// Fitted per-activity parameters for the azimuth fluctuation process.
OrientationProcessParams azimuth_process_params(Activity a);

struct SampledSeries {
  std::vector<double> times;   // s, strictly increasing
  std::vector<double> values;  // deg

  void validate() const;
};

/// Zero-mean process realization at the given instants.
SampledSeries sample_process(const OrientationProcessParams& params,
                             const std::vector<double>& times, std::uint64_t seed);

/// mean + process + white measurement noise.
SampledSeries noisy_measurement(const OrientationProcessParams& params,
                                const std::vector<double>& times, std::uint64_t seed);

/// Unnormalized model ACF: (A^2/2) cos(2 pi f tau) + sigma_v^2 [tau = 0].
double theoretical_acf(const OrientationProcessParams& params, double tau);
double theoretical_acf_normalized(const OrientationProcessParams& params, double tau);

/// Strictly increasing instants with integer-millisecond gaps drawn from a
/// categorical distribution (defaults mimic the handset sensor cadence).
std::vector<double> random_sampling_times(
    double duration, std::uint64_t seed,
    const std::vector<double>& gap_weights = {0.5, 0.3, 0.2},
    const std::vector<int>& gaps_ms = {1, 18, 64});

/// Draws of the polar angle treated as a random variable: mean + A sin(U) + X
/// with U uniform and X from the activity's noise family.  Degrees.
std::vector<double> sample_theta_rv(const OrientationProcessParams& params, int count,
                                    std::uint64_t seed);

/// One uniform draw of the UE direction on (-pi, pi], radians.
double draw_ue_direction(std::mt19937_64& rng);
double sample_ue_direction(std::uint64_t seed);

void write_series_csv(const SampledSeries& series, const std::string& path);
SampledSeries read_series_csv(const std::string& path);

}  // namespace lifi
