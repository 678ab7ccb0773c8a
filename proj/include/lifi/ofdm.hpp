#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lifi/channel.hpp"

namespace lifi {

/// DC-OFDM transmission-system parameters.
struct OfdmLinkConfig {
  int num_subcarriers = 128;   // N, power of two
  int used_subcarriers = 108;  // N_u, even, <= N - 2
  int cyclic_prefix = 7;       // N_cp
  int qam_order = 16;          // M, square QAM
  double bit_rate = 100e6;     // R_b (bit/s)
  double clip_low = 3.2;       // r_1, in units of the signal std
  double clip_high = 3.2;      // r_2
  double led_cutoff = 40e6;    // f_c_LED (Hz)
  double converter_cutoff = 0; // DAC/ADC cutoff; 0 means the OFDM bandwidth
  double noise_psd = 1e-21;    // N_0 (A^2/Hz), single-sided
  double responsivity = 0.6;   // R (A/W)
  bool ideal_front_end = false;  // bypass DAC/LED/ADC responses

  int used_pairs() const { return used_subcarriers / 2; }
  void validate() const;
};

struct SamplingRates {
  double symbol_rate;  // R_s (Hz)
  double sample_rate;  // f_s (Hz)
  double bandwidth;    // f_s / (2 r_os) (Hz)
};

SamplingRates sampling_rate(const OfdmLinkConfig& config);

/// Data-subcarrier frequencies n f_s / N for n = 1..N_u/2; the Hermitian
/// mirror half carries the conjugate symbols and the same SNR.
std::vector<double> subcarrier_frequencies(const OfdmLinkConfig& config);

/// Gaussian tail function Q(x).
double gaussian_q(double x);

/// Bussgang attenuation of clipping at (-r1 sigma, r2 sigma).
double clipping_attenuation(double r1, double r2);

struct FrontEndResponse {
  std::complex<double> dac;
  std::complex<double> led;
  std::complex<double> adc;
};

FrontEndResponse front_end_response(const OfdmLinkConfig& config, double f);

/// Electrical SNR per used subcarrier pair at the given per-subcarrier power
/// scale (P_n = power_scale).
std::vector<double> snr_per_subcarrier(const OfdmLinkConfig& config,
                                       const ChannelResponse& channel,
                                       double power_scale);

struct BerResult {
  std::vector<double> per_subcarrier;
  double average;
};

BerResult ber(const OfdmLinkConfig& config, const std::vector<double>& snr);

/// Received electrical SNR (dB) for an average optical transmit power P_t.
double received_snr_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                       double transmit_power);

/// Average optical power implied by the DC bias at the given power scale,
/// using the smaller clipping ratio.
double bias_transmit_power(const OfdmLinkConfig& config, double power_scale);

double snr_at_scale_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                       double power_scale);

/// Received SNR required to reach the target average BER; bisection over the
/// per-subcarrier power scale.  Throws std::runtime_error when the channel is
/// too distorted to ever reach the target.
double snr_target_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                     double target_ber);

/// SNR_t(full) - SNR_t(LOS only).  Throws std::domain_error when the LOS
/// link is blocked.
double snr_penalty_db(const OfdmLinkConfig& config, const ChannelResponse& full,
                      const ChannelResponse& los_only, double target_ber);

struct SimulationResult {
  double bit_error_rate;
  std::uint64_t bit_errors;
  std::uint64_t bits;
  bool low_confidence;  // too few errors observed to trust the estimate
};

/// Time-domain DC-OFDM chain: QAM mapping, Hermitian IDFT, CP, clipping,
/// front-end and channel filtering, AWGN at the Eq.-(15)-equivalent level,
/// one-tap equalization with the known response, hard demapping.
SimulationResult simulate_link(const OfdmLinkConfig& config,
                               const ChannelResponse& channel, double target_snr_db,
                               int num_symbols, std::uint64_t seed);

struct LinkReport {
  std::vector<int> subcarrier;
  std::vector<double> frequency_hz;
  std::vector<double> snr_db;
  std::vector<double> bit_error_rate;
  double average_ber = 0.0;
  double received_snr_db = 0.0;
  bool los_only = false;
};

LinkReport make_link_report(const OfdmLinkConfig& config, const ChannelResponse& channel,
                            double snr_db, bool los_only);

void write_link_report_csv(const LinkReport& report, const std::string& path);

// Pieces of the simulation chain, exposed for direct testing.

/// Gray-coded square-QAM constellation with unit average power; the symbol
/// at index i carries the bits of i (per-axis binary-reflected Gray).
std::vector<std::complex<double>> qam_constellation(int order);

int qam_demap(std::complex<double> y, int order);

void clip_signal(std::span<double> x, double low, double high);

/// One OFDM time symbol (length N, no CP): Hermitian mapping of the data
/// symbols onto subcarriers 1..N_u/2 followed by an unnormalized IDFT.
std::vector<double> ofdm_time_symbol(const OfdmLinkConfig& config,
                                     std::span<const std::complex<double>> data);

}  // namespace lifi
