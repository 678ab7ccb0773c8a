#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "lifi/orientation.hpp"

namespace lifi {

enum class SpectrumScale { power_spectrum, power_spectral_density };

/// One-sided periodogram.  With the power-spectrum scaling a sinusoid of
/// amplitude A at an on-grid frequency carries 2 PS(f0) = A^2/2; with the
/// density scaling white noise of variance s^2 sits at a flat level s^2.
struct Periodogram {
  std::vector<double> frequencies;  // Hz, strictly increasing, > 0
  std::vector<double> values;
  SpectrumScale scale = SpectrumScale::power_spectrum;
  std::size_t sample_count = 0;  // N of the underlying series

  void validate() const;
};

/// Complex line spectrum D(f) = (1/N) sum_k x_k exp(-j 2 pi f t_k); |D|^2 is
/// the power spectrum.
struct ComplexSpectrum {
  std::vector<double> frequencies;
  std::vector<std::complex<double>> values;
  std::size_t sample_count = 0;
};

/// Uniform grid from 1/(oversample T) up to max_frequency.
std::vector<double> frequency_grid(const std::vector<double>& times, double oversample,
                                   double max_frequency);

/// Classic Lomb-Scargle periodogram with the orthogonalizing phase shift.
/// On evenly sampled input it matches the DFT periodogram bin for bin.
Periodogram lomb_scargle(const SampledSeries& series, const std::vector<double>& grid,
                         SpectrumScale scale);

ComplexSpectrum dirty_spectrum(const SampledSeries& series,
                               const std::vector<double>& grid);

/// Spectral window W(f) = (1/N) sum_k exp(-j 2 pi f t_k); W(0) = 1.
ComplexSpectrum window_transform(const std::vector<double>& times,
                                 const std::vector<double>& grid);

/// Power spectrum |W(f)|^2 of the sampling window.
Periodogram window_spectrum(const std::vector<double>& times,
                            const std::vector<double>& grid);

struct NyquistResult {
  double frequency;   // Hz
  bool commensurate;  // false: gaps share no usable grid, value is 1/(2 min gap)
};

/// Generalized Nyquist 1/(2 kappa), kappa the gcd of the gaps on a 1 us grid.
NyquistResult nyquist_random(const std::vector<double>& times);

/// Scargle false-alarm level z solving 1 - (1 - e^-z)^M = p, in units of the
/// noise variance of the density-scaled periodogram.
double false_alarm_level(double p, std::size_t independent_frequencies);

/// The same level mapped onto a periodogram scaling.
double false_alarm_threshold(double p, std::size_t independent_frequencies,
                             SpectrumScale scale, double noise_variance,
                             std::size_t sample_count);

struct CleanStop {
  int max_iterations = 500;
  double residual_amplitude = 0.0;  // stop when max |residual| falls below
};

struct CleanComponent {
  std::size_t bin;
  double frequency;
  std::complex<double> amplitude;  // in D units; a line A sin(..) gives |a| = A/2
};

struct CleanResult {
  std::vector<CleanComponent> components;  // aggregated per bin
  ComplexSpectrum residual;
  Periodogram cleaned;  // PS of components restored onto the residual
  int iterations = 0;
  bool converged = false;
};

/// CLEAN deconvolution of the sampling window (Roberts-style complex
/// subtraction with the mirrored-frequency correction).  `window` must cover
/// [0, 2 f_max] on the same spacing as the dirty grid.
CleanResult clean(const ComplexSpectrum& dirty, const ComplexSpectrum& window,
                  double gain, const CleanStop& stop);

struct WienerFir {
  double f0;
  double f1;
};

/// First-order Wiener filter for a harmonic process in white noise observed
/// with white measurement noise; solves the 2x2 Wiener-Hopf system.
WienerFir wiener_design(double amplitude, double frequency, double process_var,
                        double measurement_var, double tau);

/// Inverse transform of a density-scaled periodogram: R(tau) is the mean of
/// PSD(f) cos(2 pi f tau) over the grid, so R(0) recovers the total power.
std::vector<double> acf_from_spectrum(const Periodogram& psd,
                                      const std::vector<double>& lags);

struct EstimateConfig {
  double oversample = 5.0;
  double max_frequency = 0.0;  // 0: generalized Nyquist of the sampling
  double false_alarm_p = 1e-3;
  double clean_gain = 0.25;
  int clean_max_iterations = 500;
  double measurement_noise_var = 1.069e-3;  // deg^2, polar-angle sensor default
  double epsilon = 0.0;  // lag for the sigma_v estimator; 0: one grid step
  std::uint64_t dedup_seed = 1;
};

struct EstimateDiagnostics {
  double noise_floor = 0.0;     // deg^2
  double threshold_psd = 0.0;
  double nyquist = 0.0;
  bool commensurate = true;
  double grid_step = 0.0;
  std::size_t grid_size = 0;
  int clean_iterations = 0;
  bool clean_converged = false;
  std::size_t component_count = 0;
  WienerFir wiener{1.0, 0.0};
};

struct EstimateResult {
  bool detected = false;
  double amplitude_deg = 0.0;  // A
  double frequency_hz = 0.0;   // f (0 when not detected)
  double process_var = 0.0;    // sigma_v^2, deg^2
  double mean_deg = 0.0;
  Periodogram cleaned;
  EstimateDiagnostics diagnostics;

  /// Model ACF with the estimated parameters: line + residual floor.
  double acf(double tau) const;
  double acf_normalized(double tau) const;

 private:
  friend EstimateResult estimate_params(const SampledSeries&, const EstimateConfig&);
  double line_power_ = 0.0;      // filtered sinusoid power
  double residual_mean_ = 0.0;   // filtered floor level
  std::vector<double> residual_psd_;
  std::vector<double> residual_freqs_;
};

/// Full recovery pipeline: Lomb-Scargle, false-alarm gating, CLEAN, peak
/// readout, Wiener filtering, ACF, and the small-lag sigma_v estimator.
EstimateResult estimate_params(const SampledSeries& series,
                               const EstimateConfig& config = {});

/// sigma_v^2 from the ACF ratio at a small lag: A^2 (1 - r) / (2 r) with
/// r = R(eps)/R(0).
double process_noise_from_acf_ratio(double amplitude, double ratio);

/// Duplicate-timestamp removal, keeping one of each group at random.
SampledSeries deduplicate(const SampledSeries& series, std::uint64_t seed);

void write_periodogram_csv(const Periodogram& p, const std::string& path);
void write_estimate_json(const EstimateResult& result, const std::string& path);

}  // namespace lifi
