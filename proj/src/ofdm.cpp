#include "lifi/ofdm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2 DIT FFT, unnormalized, exp(-j 2 pi nk / N) kernel.
void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Fifth-order Bessel low-pass, normalized to -3 dB at f_c.  Reversed Bessel
// polynomial coefficients for s^0..s^5.
constexpr double kBessel5[6] = {945.0, 945.0, 420.0, 105.0, 15.0, 1.0};

std::complex<double> bessel5_prototype(double w) {
  std::complex<double> s{0.0, w};
  std::complex<double> p{0.0, 0.0};
  std::complex<double> sk{1.0, 0.0};
  for (double c : kBessel5) {
    p += c * sk;
    sk *= s;
  }
  return kBessel5[0] / p;
}

double bessel5_half_power_freq() {
  // |H(jw)|^2 = 1/2; bracket the delay-normalized prototype.
  double lo = 1.0, hi = 4.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::norm(bessel5_prototype(mid)) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::complex<double> bessel5(double f, double cutoff) {
  static const double w3 = bessel5_half_power_freq();
  return bessel5_prototype(f / cutoff * w3);
}

std::complex<double> zero_order_hold(double f, double fs) {
  const double x = f / fs;
  if (x == 0.0) return {1.0, 0.0};
  return std::polar(std::sin(kPi * x) / (kPi * x), -kPi * x);
}

int gray_encode(int b) { return b ^ (b >> 1); }

double qam_axis_scale(int order) {
  return std::sqrt(3.0 / (2.0 * (order - 1)));
}

double ber_per_subcarrier(int order, double snr) {
  return 4.0 / std::log2(static_cast<double>(order)) *
         (1.0 - 1.0 / std::sqrt(static_cast<double>(order))) *
         gaussian_q(std::sqrt(3.0 * snr / (order - 1)));
}

double average_ber_at_scale(const OfdmLinkConfig& config, const ChannelResponse& channel,
                            double power_scale) {
  return ber(config, snr_per_subcarrier(config, channel, power_scale)).average;
}

// Streaming FIR with inter-block state.
class Fir {
 public:
  explicit Fir(std::vector<double> taps)
      : taps_(std::move(taps)), history_(taps_.size(), 0.0) {}

  void process(std::span<double> x) {
    const std::size_t L = taps_.size();
    for (double& sample : x) {
      history_[pos_] = sample;
      double acc = 0.0;
      std::size_t idx = pos_;
      for (std::size_t k = 0; k < L; ++k) {
        acc += taps_[k] * history_[idx];
        idx = idx == 0 ? L - 1 : idx - 1;
      }
      pos_ = (pos_ + 1) % L;
      sample = acc;
    }
  }

 private:
  std::vector<double> taps_;
  std::vector<double> history_;
  std::size_t pos_ = 0;
};

// Real impulse response from samples of a spectrum at k f_s / N, k = 0..N/2,
// truncated where the tail energy becomes negligible.
std::vector<double> impulse_from_spectrum(const std::vector<std::complex<double>>& half,
                                          int n) {
  std::vector<std::complex<double>> full(n);
  full[0] = half[0];
  full[n / 2] = half[n / 2];
  for (int k = 1; k < n / 2; ++k) {
    full[k] = half[k];
    full[n - k] = std::conj(half[k]);
  }
  fft(full, true);
  std::vector<double> h(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    h[k] = full[k].real() / n;
    total += h[k] * h[k];
  }
  double tail = 0.0;
  int len = n;
  while (len > 1) {
    tail += h[len - 1] * h[len - 1];
    if (tail > 1e-12 * total) break;
    --len;
  }
  h.resize(len);
  return h;
}

}  // namespace

void OfdmLinkConfig::validate() const {
  if (!is_pow2(num_subcarriers) || num_subcarriers < 8)
    throw std::invalid_argument("N must be a power of two >= 8");
  if (used_subcarriers < 2 || used_subcarriers > num_subcarriers - 2 ||
      used_subcarriers % 2 != 0)
    throw std::invalid_argument("N_u must be even and within [2, N-2]");
  if (cyclic_prefix < 0) throw std::invalid_argument("N_cp must be >= 0");
  const int m = qam_order;
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || root * root != m || !is_pow2(root))
    throw std::invalid_argument("M must be a square QAM order (4, 16, 64, ...)");
  if (bit_rate <= 0.0) throw std::invalid_argument("bit rate must be positive");
  if (clip_low <= 0.0 || clip_high <= 0.0)
    throw std::invalid_argument("clipping ratios must be positive");
  if (led_cutoff <= 0.0) throw std::invalid_argument("LED cutoff must be positive");
  if (noise_psd <= 0.0) throw std::invalid_argument("noise PSD must be positive");
  if (responsivity <= 0.0) throw std::invalid_argument("responsivity must be positive");
}

SamplingRates sampling_rate(const OfdmLinkConfig& config) {
  config.validate();
  const double symbol_rate =
      2.0 * config.bit_rate / std::log2(static_cast<double>(config.qam_order));
  const double oversampling =
      static_cast<double>(config.num_subcarriers) / config.used_subcarriers;
  const double sample_rate =
      oversampling * symbol_rate *
      (config.num_subcarriers + config.cyclic_prefix) / config.num_subcarriers;
  return {symbol_rate, sample_rate, sample_rate / (2.0 * oversampling)};
}

std::vector<double> subcarrier_frequencies(const OfdmLinkConfig& config) {
  const double fs = sampling_rate(config).sample_rate;
  std::vector<double> f(config.used_pairs());
  for (int n = 1; n <= config.used_pairs(); ++n)
    f[n - 1] = n * fs / config.num_subcarriers;
  return f;
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double clipping_attenuation(double r1, double r2) {
  if (r1 < 0.0 || r2 < 0.0) throw std::invalid_argument("clipping ratios must be >= 0");
  return 1.0 - (gaussian_q(r1) + gaussian_q(r2));
}

FrontEndResponse front_end_response(const OfdmLinkConfig& config, double f) {
  if (f < 0.0) throw std::invalid_argument("negative frequency");
  if (config.ideal_front_end) return {{1, 0}, {1, 0}, {1, 0}};
  const SamplingRates rates = sampling_rate(config);
  const double conv =
      config.converter_cutoff > 0.0 ? config.converter_cutoff : rates.bandwidth;
  FrontEndResponse r;
  r.dac = zero_order_hold(f, rates.sample_rate) * bessel5(f, conv);
  r.led = 1.0 / std::complex<double>(1.0, f / config.led_cutoff);
  r.adc = bessel5(f, conv);
  return r;
}

std::vector<double> snr_per_subcarrier(const OfdmLinkConfig& config,
                                       const ChannelResponse& channel,
                                       double power_scale) {
  config.validate();
  const SamplingRates rates = sampling_rate(config);
  const double k = clipping_attenuation(config.clip_low, config.clip_high);
  const double r = config.responsivity;
  std::vector<double> snr(config.used_pairs());
  const auto freqs = subcarrier_frequencies(config);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const FrontEndResponse fe = front_end_response(config, freqs[i]);
    const std::complex<double> h = channel.cir_at(freqs[i]);
    const double signal =
        power_scale * k * k * r * r * std::norm(fe.dac * fe.led * h * fe.adc);
    const double noise = rates.sample_rate * config.noise_psd * std::norm(fe.adc) /
                         (2.0 * config.num_subcarriers);
    snr[i] = signal / noise;
  }
  return snr;
}

BerResult ber(const OfdmLinkConfig& config, const std::vector<double>& snr) {
  BerResult result;
  result.per_subcarrier.reserve(snr.size());
  double sum = 0.0;
  for (double g : snr) {
    if (g < 0.0) throw std::invalid_argument("negative SNR");
    const double p = ber_per_subcarrier(config.qam_order, g);
    result.per_subcarrier.push_back(p);
    sum += p;
  }
  result.average = snr.empty() ? 0.0 : sum / static_cast<double>(snr.size());
  return result;
}

double received_snr_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                       double transmit_power) {
  if (transmit_power <= 0.0) throw std::invalid_argument("P_t must be positive");
  const SamplingRates rates = sampling_rate(config);
  const double h0 = channel.dc_cir();
  const double snr = config.responsivity * config.responsivity * h0 * h0 *
                     transmit_power * transmit_power /
                     (config.noise_psd * rates.sample_rate / 2.0);
  return 10.0 * std::log10(snr);
}

double bias_transmit_power(const OfdmLinkConfig& config, double power_scale) {
  double sum = 0.0;
  for (double f : subcarrier_frequencies(config))
    sum += std::norm(front_end_response(config, f).dac);
  const double analog_var = 2.0 * power_scale * sum;
  return std::min(config.clip_low, config.clip_high) * std::sqrt(analog_var);
}

double snr_at_scale_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                       double power_scale) {
  return received_snr_db(config, channel, bias_transmit_power(config, power_scale));
}

double snr_target_db(const OfdmLinkConfig& config, const ChannelResponse& channel,
                     double target_ber) {
  if (target_ber <= 0.0 || target_ber >= 0.5)
    throw std::invalid_argument("target BER must lie in (0, 0.5)");
  double lo = 1e-12, hi = 1e12;
  if (average_ber_at_scale(config, channel, hi) > target_ber)
    throw std::runtime_error("channel cannot reach the target BER at any power");
  if (average_ber_at_scale(config, channel, lo) < target_ber)
    throw std::runtime_error("target BER already met at negligible power");
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double pb = average_ber_at_scale(config, channel, mid);
    if (std::abs(pb - target_ber) <= 1e-6 * target_ber) {
      lo = hi = mid;
      break;
    }
    (pb > target_ber ? lo : hi) = mid;
  }
  return snr_at_scale_db(config, channel, std::sqrt(lo * hi));
}

double snr_penalty_db(const OfdmLinkConfig& config, const ChannelResponse& full,
                      const ChannelResponse& los_only, double target_ber) {
  if (los_only.dc_los() <= 0.0)
    throw std::domain_error("SNR penalty undefined: LOS link blocked");
  return snr_target_db(config, full, target_ber) -
         snr_target_db(config, los_only, target_ber);
}

std::vector<std::complex<double>> qam_constellation(int order) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  if (root * root != order || !is_pow2(root) || order < 4)
    throw std::invalid_argument("order must be a square QAM size");
  const int axis_bits = static_cast<int>(std::lround(std::log2(root)));
  const double s = qam_axis_scale(order);
  // Per-axis Gray code: symbol index = (i bits | q bits).
  std::vector<int> level_of_bits(root);
  for (int b = 0; b < root; ++b) level_of_bits[gray_encode(b)] = 2 * b - (root - 1);
  std::vector<std::complex<double>> points(order);
  for (int idx = 0; idx < order; ++idx) {
    const int ib = idx >> axis_bits;
    const int qb = idx & (root - 1);
    points[idx] = {s * level_of_bits[ib], s * level_of_bits[qb]};
  }
  return points;
}

int qam_demap(std::complex<double> y, int order) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
  const int axis_bits = static_cast<int>(std::lround(std::log2(root)));
  const double s = qam_axis_scale(order);
  auto axis = [&](double v) {
    int pos = static_cast<int>(std::lround((v / s + root - 1) / 2.0));
    return gray_encode(std::clamp(pos, 0, root - 1));
  };
  return (axis(y.real()) << axis_bits) | axis(y.imag());
}

void clip_signal(std::span<double> x, double low, double high) {
  for (double& v : x) v = std::clamp(v, low, high);
}

std::vector<double> ofdm_time_symbol(const OfdmLinkConfig& config,
                                     std::span<const std::complex<double>> data) {
  if (static_cast<int>(data.size()) != config.used_pairs())
    throw std::invalid_argument("expected one data symbol per used pair");
  const int n = config.num_subcarriers;
  std::vector<std::complex<double>> x(n, {0.0, 0.0});
  for (int k = 1; k <= config.used_pairs(); ++k) {
    x[k] = data[k - 1];
    x[n - k] = std::conj(data[k - 1]);
  }
  fft(x, true);  // unnormalized: matches the sum-form IDFT
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = x[k].real();
  return t;
}

SimulationResult simulate_link(const OfdmLinkConfig& config,
                               const ChannelResponse& channel, double target_snr_db,
                               int num_symbols, std::uint64_t seed) {
  config.validate();
  if (num_symbols < 1) throw std::invalid_argument("need at least one symbol");

  const int n = config.num_subcarriers;
  const int pairs = config.used_pairs();
  const int block = n + config.cyclic_prefix;
  const SamplingRates rates = sampling_rate(config);
  const double k_clip = clipping_attenuation(config.clip_low, config.clip_high);

  // Per-subcarrier power scale that realizes the requested received SNR.
  const double snr_ref = snr_at_scale_db(config, channel, 1.0);
  const double power_scale = std::pow(10.0, (target_snr_db - snr_ref) / 10.0);
  const double amp = std::sqrt(power_scale);

  // Signal path (channel + DAC + LED, responsivity) and ADC path sampled on
  // the DFT grid.
  std::vector<std::complex<double>> h_signal(n / 2 + 1), h_adc(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    const double f = k * rates.sample_rate / n;
    const FrontEndResponse fe = front_end_response(config, f);
    h_signal[k] = config.responsivity * fe.dac * fe.led * channel.cir_at(f);
    h_adc[k] = fe.adc;
  }
  Fir fir_signal(impulse_from_spectrum(h_signal, n));
  Fir fir_adc(impulse_from_spectrum(h_adc, n));

  const double sigma_time = amp * std::sqrt(static_cast<double>(config.used_subcarriers));
  const double clip_lo = -config.clip_low * sigma_time;
  const double clip_hi = config.clip_high * sigma_time;
  const double noise_std = std::sqrt(config.noise_psd * rates.sample_rate / 2.0);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> symbol_dist(0, config.qam_order - 1);
  std::normal_distribution<double> noise(0.0, noise_std);
  const auto constellation = qam_constellation(config.qam_order);
  const int bits_per_point = static_cast<int>(std::lround(std::log2(config.qam_order)));

  std::vector<int> tx_indices(pairs);
  std::vector<std::complex<double>> data(pairs);
  std::vector<double> stream(block);
  std::vector<std::complex<double>> rx(n);

  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  for (int sym = 0; sym < num_symbols; ++sym) {
    for (int i = 0; i < pairs; ++i) {
      tx_indices[i] = symbol_dist(rng);
      data[i] = amp * constellation[tx_indices[i]];
    }
    const std::vector<double> body = ofdm_time_symbol(config, data);
    for (int k = 0; k < config.cyclic_prefix; ++k)
      stream[k] = body[n - config.cyclic_prefix + k];
    std::copy(body.begin(), body.end(), stream.begin() + config.cyclic_prefix);

    clip_signal(stream, clip_lo, clip_hi);
    fir_signal.process(stream);
    for (double& v : stream) v += noise(rng);
    fir_adc.process(stream);

    for (int k = 0; k < n; ++k) rx[k] = stream[config.cyclic_prefix + k];
    fft(rx, false);
    for (int i = 0; i < pairs; ++i) {
      const int sc = i + 1;
      const std::complex<double> eq =
          static_cast<double>(n) * k_clip * amp * h_signal[sc] * h_adc[sc];
      const int detected = qam_demap(rx[sc] / eq, config.qam_order);
      errors += static_cast<std::uint64_t>(
          __builtin_popcount(static_cast<unsigned>(detected ^ tx_indices[i])));
      bits += bits_per_point;
    }
  }

  SimulationResult result;
  result.bit_errors = errors;
  result.bits = bits;
  result.bit_error_rate = bits ? static_cast<double>(errors) / bits : 0.0;
  result.low_confidence = errors < 8;
  return result;
}

LinkReport make_link_report(const OfdmLinkConfig& config, const ChannelResponse& channel,
                            double snr_db, bool los_only) {
  const double snr_ref = snr_at_scale_db(config, channel, 1.0);
  const double power_scale = std::pow(10.0, (snr_db - snr_ref) / 10.0);
  const auto snr = snr_per_subcarrier(config, channel, power_scale);
  const BerResult b = ber(config, snr);
  LinkReport report;
  const auto freqs = subcarrier_frequencies(config);
  for (std::size_t i = 0; i < snr.size(); ++i) {
    report.subcarrier.push_back(static_cast<int>(i) + 1);
    report.frequency_hz.push_back(freqs[i]);
    report.snr_db.push_back(10.0 * std::log10(snr[i]));
    report.bit_error_rate.push_back(b.per_subcarrier[i]);
  }
  report.average_ber = b.average;
  report.received_snr_db = snr_db;
  report.los_only = los_only;
  return report;
}

void write_link_report_csv(const LinkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "subcarrier,frequency_hz,snr_db,ber\n";
  char line[160];
  for (std::size_t i = 0; i < report.subcarrier.size(); ++i) {
    std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%.12g\n", report.subcarrier[i],
                  report.frequency_hz[i], report.snr_db[i], report.bit_error_rate[i]);
    out << line;
  }
}

}  // namespace lifi
