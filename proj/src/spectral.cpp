#include "lifi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_uniform(const std::vector<double>& grid, double& f0, double& df) {
  if (grid.size() < 2) {
    f0 = grid.empty() ? 0.0 : grid.front();
    df = 0.0;
    return true;
  }
  f0 = grid.front();
  df = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - df) > 1e-9 * std::max(df, 1.0)) return false;
  return true;
}

/*
 * Per-sample trigonometric recurrence across a uniform frequency grid:
 * cos/sin(2 pi (f0 + i df) t) advance by a fixed rotation per grid step, so
 * each (sample, frequency) pair costs one complex multiply instead of a
 * sincos call.  Magnitude drift over ~1e5 steps stays near 1e-11, well below
 * the 1e-9 agreement required against a direct transform.
 */
void accumulate_trig(const std::vector<double>& times, const double* weights,
                     double f0, double df, std::size_t count, double* out_cos,
                     double* out_sin) {
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double w = weights ? weights[j] : 1.0;
    const double phase = 2.0 * kPi * f0 * times[j];
    const double step = 2.0 * kPi * df * times[j];
    double c = std::cos(phase), s = std::sin(phase);
    const double rc = std::cos(step), rs = std::sin(step);
    for (std::size_t i = 0; i < count; ++i) {
      out_cos[i] += w * c;
      out_sin[i] += w * s;
      const double cn = c * rc - s * rs;
      s = s * rc + c * rs;
      c = cn;
    }
  }
}

void accumulate_direct(const std::vector<double>& times, const double* weights,
                       const std::vector<double>& grid, double* out_cos,
                       double* out_sin) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double c = 0.0, s = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double w = weights ? weights[j] : 1.0;
      const double a = 2.0 * kPi * grid[i] * times[j];
      c += w * std::cos(a);
      s += w * std::sin(a);
    }
    out_cos[i] = c;
    out_sin[i] = s;
  }
}

void trig_sums(const std::vector<double>& times, const double* weights,
               const std::vector<double>& grid, std::vector<double>& out_cos,
               std::vector<double>& out_sin) {
  out_cos.assign(grid.size(), 0.0);
  out_sin.assign(grid.size(), 0.0);
  if (grid.empty()) return;
  double f0, df;
  if (is_uniform(grid, f0, df))
    accumulate_trig(times, weights, f0, df, grid.size(), out_cos.data(),
                    out_sin.data());
  else
    accumulate_direct(times, weights, grid, out_cos.data(), out_sin.data());
}

void scaled_grid(const std::vector<double>& grid, double factor,
                 std::vector<double>& out) {
  out.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = factor * grid[i];
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty range");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (m + lower);
  }
  return m;
}

}  // namespace

void Periodogram::validate() const {
  if (frequencies.size() != values.size())
    throw std::invalid_argument("periodogram grid/value length mismatch");
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (frequencies[i] <= 0.0 || (i > 0 && frequencies[i] <= frequencies[i - 1]))
      throw std::invalid_argument("periodogram grid must be increasing and > 0");
    if (values[i] < 0.0) throw std::invalid_argument("negative periodogram value");
  }
}

std::vector<double> frequency_grid(const std::vector<double>& times, double oversample,
                                   double max_frequency) {
  if (times.size() < 2) throw std::invalid_argument("need at least two samples");
  const double span = times.back() - times.front();
  if (span <= 0.0 || oversample <= 0.0 || max_frequency <= 0.0)
    throw std::invalid_argument("bad frequency grid request");
  const double df = 1.0 / (oversample * span);
  const auto count = static_cast<std::size_t>(std::floor(max_frequency / df + 1e-9));
  if (count == 0) throw std::invalid_argument("grid would be empty");
  if (count > 3000000) throw std::invalid_argument("frequency grid too fine");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = df * static_cast<double>(i + 1);
  return grid;
}

Periodogram lomb_scargle(const SampledSeries& series, const std::vector<double>& grid,
                         SpectrumScale scale) {
  series.validate();
  if (series.times.size() < 2) throw std::invalid_argument("need at least two samples");
  if (grid.empty() || grid.front() <= 0.0)
    throw std::invalid_argument("grid must be nonempty with positive frequencies");

  const auto n = static_cast<double>(series.times.size());
  std::vector<double> xc, xs, c2, s2, grid2;
  trig_sums(series.times, series.values.data(), grid, xc, xs);
  scaled_grid(grid, 2.0, grid2);
  trig_sums(series.times, nullptr, grid2, c2, s2);

  Periodogram p;
  p.frequencies = grid;
  p.values.resize(grid.size());
  p.scale = scale;
  p.sample_count = series.times.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // tan(2 w tau) = S2/C2 orthogonalizes the sine and cosine terms.
    const double theta = 0.5 * std::atan2(s2[i], c2[i]);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cc = 0.5 * (n + std::hypot(c2[i], s2[i]));
    const double ss = n - cc;
    const double sxc = xc[i] * ct + xs[i] * st;
    const double sxs = xs[i] * ct - xc[i] * st;
    double power = 0.0;
    if (cc > 1e-9 * n) power += sxc * sxc / cc;
    if (ss > 1e-9 * n) power += sxs * sxs / ss;
    power *= 0.5;
    p.values[i] = scale == SpectrumScale::power_spectral_density ? power : power / n;
  }
  return p;
}

ComplexSpectrum dirty_spectrum(const SampledSeries& series,
                               const std::vector<double>& grid) {
  series.validate();
  const auto n = static_cast<double>(series.times.size());
  std::vector<double> xc, xs;
  trig_sums(series.times, series.values.data(), grid, xc, xs);
  ComplexSpectrum d;
  d.frequencies = grid;
  d.sample_count = series.times.size();
  d.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    d.values[i] = {xc[i] / n, -xs[i] / n};
  return d;
}

ComplexSpectrum window_transform(const std::vector<double>& times,
                                 const std::vector<double>& grid) {
  if (times.size() < 2) throw std::invalid_argument("need at least two samples");
  const auto n = static_cast<double>(times.size());
  std::vector<double> c, s;
  trig_sums(times, nullptr, grid, c, s);
  ComplexSpectrum w;
  w.frequencies = grid;
  w.sample_count = times.size();
  w.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w.values[i] = {c[i] / n, -s[i] / n};
  return w;
}

Periodogram window_spectrum(const std::vector<double>& times,
                            const std::vector<double>& grid) {
  const ComplexSpectrum w = window_transform(times, grid);
  Periodogram p;
  p.frequencies = grid;
  p.scale = SpectrumScale::power_spectrum;
  p.sample_count = times.size();
  p.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p.values[i] = std::norm(w.values[i]);
  return p;
}

NyquistResult nyquist_random(const std::vector<double>& times) {
  if (times.size() < 2) throw std::invalid_argument("need at least two samples");
  std::int64_t gcd_us = 0;
  std::int64_t min_gap_us = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const auto gap = static_cast<std::int64_t>(std::llround((times[k] - times[k - 1]) * 1e6));
    if (gap <= 0) throw std::invalid_argument("times must be strictly increasing");
    gcd_us = std::gcd(gcd_us, gap);
    min_gap_us = std::min(min_gap_us, gap);
  }
  // A gcd collapsing to the 1 us rounding grid under much larger gaps means
  // the spacings are not commensurate at sensor precision.
  if (gcd_us == 1 && min_gap_us >= 10)
    return {1.0 / (2.0 * static_cast<double>(min_gap_us) * 1e-6), false};
  return {1.0 / (2.0 * static_cast<double>(gcd_us) * 1e-6), true};
}

double false_alarm_level(double p, std::size_t independent_frequencies) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("p must lie in (0, 1)");
  const double m = static_cast<double>(std::max<std::size_t>(1, independent_frequencies));
  // 1 - (1-p)^(1/M) evaluated without cancellation.
  const double tail = -std::expm1(std::log1p(-p) / m);
  return -std::log(tail);
}

double false_alarm_threshold(double p, std::size_t independent_frequencies,
                             SpectrumScale scale, double noise_variance,
                             std::size_t sample_count) {
  const double z = false_alarm_level(p, independent_frequencies);
  const double psd = z * noise_variance;
  return scale == SpectrumScale::power_spectral_density
             ? psd
             : psd / static_cast<double>(sample_count);
}

CleanResult clean(const ComplexSpectrum& dirty, const ComplexSpectrum& window,
                  double gain, const CleanStop& stop) {
  if (gain <= 0.0 || gain > 1.0) throw std::invalid_argument("gain must lie in (0, 1]");
  const std::size_t nf = dirty.frequencies.size();
  if (nf == 0) throw std::invalid_argument("empty dirty spectrum");
  double f0, df;
  if (!is_uniform(dirty.frequencies, f0, df) || std::abs(f0 - df) > 1e-6 * df)
    throw std::invalid_argument("dirty grid must be uniform starting at one step");
  double w0, wdf;
  if (!is_uniform(window.frequencies, w0, wdf) || std::abs(w0) > 1e-9 ||
      std::abs(wdf - df) > 1e-6 * df || window.frequencies.size() < 2 * nf + 1)
    throw std::invalid_argument("window grid must cover [0, 2 f_max] on the same step");

  std::vector<std::complex<double>> residual = dirty.values;
  std::vector<std::complex<double>> comp(nf, {0.0, 0.0});
  const auto& w = window.values;
  // Window value at signed bin offset k (negative frequencies conjugate).
  auto wat = [&](std::ptrdiff_t k) {
    return k >= 0 ? w[static_cast<std::size_t>(k)]
                  : std::conj(w[static_cast<std::size_t>(-k)]);
  };

  CleanResult result;
  int it = 0;
  for (; it < stop.max_iterations; ++it) {
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < nf; ++i) {
      const double a = std::abs(residual[i]);
      if (a > best) {
        best = a;
        peak = i;
      }
    }
    if (best <= stop.residual_amplitude) {
      result.converged = true;
      break;
    }
    // Account for the mirrored line at -f_p leaking through W(2 f_p).
    const std::complex<double> w2p = w[2 * (peak + 1)];
    const double denom = 1.0 - std::norm(w2p);
    const std::complex<double> rp = residual[peak];
    const std::complex<double> alpha =
        std::abs(denom) > 1e-9 ? (rp - std::conj(rp) * w2p) / denom : 0.5 * rp;
    const std::complex<double> a = gain * alpha;
    const auto pm = static_cast<std::ptrdiff_t>(peak);
    for (std::size_t i = 0; i < nf; ++i) {
      const auto im = static_cast<std::ptrdiff_t>(i);
      residual[i] -= a * wat(im - pm) + std::conj(a) * w[i + peak + 2];
    }
    comp[peak] += a;
  }
  result.iterations = it;
  if (it == stop.max_iterations) {
    double best = 0.0;
    for (const auto& r : residual) best = std::max(best, std::abs(r));
    result.converged = best <= stop.residual_amplitude;
  }

  result.residual.frequencies = dirty.frequencies;
  result.residual.values = residual;
  result.residual.sample_count = dirty.sample_count;
  for (std::size_t i = 0; i < nf; ++i)
    if (comp[i] != std::complex<double>{0.0, 0.0})
      result.components.push_back({i, dirty.frequencies[i], comp[i]});
  result.cleaned.frequencies = dirty.frequencies;
  result.cleaned.scale = SpectrumScale::power_spectrum;
  result.cleaned.sample_count = dirty.sample_count;
  result.cleaned.values.resize(nf);
  for (std::size_t i = 0; i < nf; ++i)
    result.cleaned.values[i] = std::norm(residual[i] + comp[i]);
  return result;
}

WienerFir wiener_design(double amplitude, double frequency, double process_var,
                        double measurement_var, double tau) {
  const double line = 0.5 * amplitude * amplitude;
  const double r0 = line + process_var + measurement_var;
  const double r1 = line * std::cos(2.0 * kPi * frequency * tau);
  const double det = r0 * r0 - r1 * r1;
  if (std::abs(det) <= 1e-30 || r0 <= 0.0)
    throw std::invalid_argument("singular Wiener-Hopf system");
  const double d0 = line + process_var;
  return {(d0 * r0 - r1 * r1) / det, (r1 * r0 - d0 * r1) / det};
}

std::vector<double> acf_from_spectrum(const Periodogram& psd,
                                      const std::vector<double>& lags) {
  psd.validate();
  if (psd.scale != SpectrumScale::power_spectral_density)
    throw std::invalid_argument("ACF needs the density scaling");
  if (psd.values.empty()) throw std::invalid_argument("empty spectrum");
  std::vector<double> acf(lags.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(psd.values.size());
  for (std::size_t l = 0; l < lags.size(); ++l) {
    double sum = 0.0;
    for (std::size_t i = 0; i < psd.values.size(); ++i)
      sum += psd.values[i] * std::cos(2.0 * kPi * psd.frequencies[i] * lags[l]);
    acf[l] = sum * inv;
  }
  return acf;
}

double process_noise_from_acf_ratio(double amplitude, double ratio) {
  if (ratio <= 0.0 || ratio > 1.0)
    throw std::invalid_argument("ACF ratio must lie in (0, 1]");
  return amplitude * amplitude * (1.0 - ratio) / (2.0 * ratio);
}

SampledSeries deduplicate(const SampledSeries& series, std::uint64_t seed) {
  if (series.times.size() != series.values.size())
    throw std::invalid_argument("times and values must have equal length");
  std::mt19937_64 rng(seed);
  SampledSeries out;
  std::size_t k = 0;
  while (k < series.times.size()) {
    std::size_t end = k + 1;
    while (end < series.times.size() &&
           std::abs(series.times[end] - series.times[k]) < 5e-7)
      ++end;
    std::size_t pick = k;
    if (end - k > 1) {
      std::uniform_int_distribution<std::size_t> dist(k, end - 1);
      pick = dist(rng);
    }
    out.times.push_back(series.times[k]);
    out.values.push_back(series.values[pick]);
    k = end;
  }
  out.validate();
  return out;
}

double EstimateResult::acf(double tau) const {
  double r = line_power_ * std::cos(2.0 * kPi * frequency_hz * tau);
  if (!residual_psd_.empty()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < residual_psd_.size(); ++i)
      sum += residual_psd_[i] * std::cos(2.0 * kPi * residual_freqs_[i] * tau);
    r += sum / static_cast<double>(residual_psd_.size());
  }
  return r;
}

double EstimateResult::acf_normalized(double tau) const {
  const double r0 = acf(0.0);
  if (r0 <= 0.0) throw std::runtime_error("degenerate estimated ACF");
  return acf(tau) / r0;
}

EstimateResult estimate_params(const SampledSeries& series,
                               const EstimateConfig& config) {
  SampledSeries data = deduplicate(series, config.dedup_seed);
  if (data.times.size() < 16) throw std::invalid_argument("series too short");

  // Shift the origin; every transform here only needs time differences.
  const double t0 = data.times.front();
  for (double& t : data.times) t -= t0;

  EstimateResult result;
  const double mean =
      std::accumulate(data.values.begin(), data.values.end(), 0.0) /
      static_cast<double>(data.values.size());
  result.mean_deg = mean;
  for (double& v : data.values) v -= mean;

  const NyquistResult nyq = nyquist_random(data.times);
  const double fmax =
      config.max_frequency > 0.0 ? config.max_frequency : nyq.frequency;
  const std::vector<double> grid = frequency_grid(data.times, config.oversample, fmax);
  const double df = grid.front();
  const double span = data.times.back();

  EstimateDiagnostics& diag = result.diagnostics;
  diag.nyquist = nyq.frequency;
  diag.commensurate = nyq.commensurate;
  diag.grid_step = df;
  diag.grid_size = grid.size();

  const Periodogram psd =
      lomb_scargle(data, grid, SpectrumScale::power_spectral_density);
  // Exponential noise bins: the median sits at ln 2 times the level.
  const double floor = median(psd.values) / std::numbers::ln2;
  diag.noise_floor = floor;

  const auto independent = static_cast<std::size_t>(std::max(1.0, span * fmax));
  diag.threshold_psd = false_alarm_threshold(config.false_alarm_p, independent,
                                             SpectrumScale::power_spectral_density,
                                             floor, data.times.size());
  const double amp_threshold =
      std::sqrt(diag.threshold_psd / static_cast<double>(data.times.size()));

  std::vector<double> window_grid(2 * grid.size() + 1);
  for (std::size_t i = 0; i < window_grid.size(); ++i)
    window_grid[i] = df * static_cast<double>(i);
  const ComplexSpectrum window = window_transform(data.times, window_grid);
  const ComplexSpectrum dirty = dirty_spectrum(data, grid);

  CleanStop stop{config.clean_max_iterations, amp_threshold};
  CleanResult cleaned = clean(dirty, window, config.clean_gain, stop);
  diag.clean_iterations = cleaned.iterations;
  diag.clean_converged = cleaned.converged;
  diag.component_count = cleaned.components.size();
  result.cleaned = std::move(cleaned.cleaned);

  const double sigma_n2 = config.measurement_noise_var;
  if (cleaned.components.empty()) {
    result.detected = false;
    result.process_var = std::max(floor - sigma_n2, 0.0);
    return result;
  }
  result.detected = true;

  // Strongest component plus its neighbors within the dirty main lobe.
  std::size_t best = 0;
  double best_amp = -1.0;
  for (const auto& c : cleaned.components) {
    const double a = std::abs(c.amplitude);
    if (a > best_amp) {
      best_amp = a;
      best = c.bin;
    }
  }
  const auto halfwidth =
      static_cast<std::size_t>(std::ceil(2.0 * config.oversample));
  std::complex<double> total{0.0, 0.0};
  double centroid = 0.0, weight = 0.0;
  for (const auto& c : cleaned.components) {
    const std::size_t lo = best > halfwidth ? best - halfwidth : 0;
    if (c.bin < lo || c.bin > best + halfwidth) continue;
    total += c.amplitude;
    centroid += std::abs(c.amplitude) * c.frequency;
    weight += std::abs(c.amplitude);
  }
  result.amplitude_deg = 2.0 * std::abs(total);
  result.frequency_hz = weight > 0.0 ? centroid / weight : grid[best];

  // Wiener filter on the regular grid implied by the band limit.
  const double tau = config.epsilon > 0.0 ? config.epsilon : 1.0 / (2.0 * fmax);
  const double sigma_v_prelim = std::max(floor - sigma_n2, 0.0);
  WienerFir fir{1.0, 0.0};
  try {
    fir = wiener_design(result.amplitude_deg, result.frequency_hz, sigma_v_prelim,
                        sigma_n2, tau);
  } catch (const std::invalid_argument&) {
    // degenerate design: fall through with the pass-through filter
  }
  diag.wiener = fir;

  const auto n = static_cast<double>(data.times.size());
  result.residual_freqs_ = grid;
  result.residual_psd_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::complex<double> f_resp =
        fir.f0 + fir.f1 * std::polar(1.0, -2.0 * kPi * grid[i] * tau);
    result.residual_psd_[i] = n * std::norm(cleaned.residual.values[i] * f_resp);
  }
  const std::complex<double> f_line =
      fir.f0 + fir.f1 * std::polar(1.0, -2.0 * kPi * result.frequency_hz * tau);
  result.line_power_ =
      0.5 * result.amplitude_deg * result.amplitude_deg * std::norm(f_line);

  const double r0 = result.acf(0.0);
  const double re = result.acf(tau);
  if (r0 > 0.0 && re > 0.0 && re <= r0)
    result.process_var = process_noise_from_acf_ratio(result.amplitude_deg, re / r0);
  else
    result.process_var = std::max(floor - sigma_n2, 0.0);
  return result;
}

void write_periodogram_csv(const Periodogram& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const char* tag = p.scale == SpectrumScale::power_spectrum
                        ? "power_spectrum"
                        : "power_spectral_density";
  out << "frequency_hz,value,normalization\n";
  char line[128];
  for (std::size_t i = 0; i < p.frequencies.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%s\n", p.frequencies[i],
                  p.values[i], tag);
    out << line;
  }
}

void write_estimate_json(const EstimateResult& result, const std::string& path) {
  nlohmann::json j;
  j["detected"] = result.detected;
  j["amplitude_deg"] = result.amplitude_deg;
  j["frequency_hz"] = result.frequency_hz;
  j["process_var_deg2"] = result.process_var;
  j["process_var_db_degree"] =
      result.process_var > 0.0 ? 10.0 * std::log10(result.process_var) : 0.0;
  j["mean_deg"] = result.mean_deg;
  const EstimateDiagnostics& d = result.diagnostics;
  j["diagnostics"] = {
      {"noise_floor_deg2", d.noise_floor},
      {"threshold_psd", d.threshold_psd},
      {"nyquist_hz", d.nyquist},
      {"commensurate", d.commensurate},
      {"grid_step_hz", d.grid_step},
      {"grid_size", d.grid_size},
      {"clean_iterations", d.clean_iterations},
      {"clean_converged", d.clean_converged},
      {"component_count", d.component_count},
      {"wiener_taps", {d.wiener.f0, d.wiener.f1}},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace lifi
