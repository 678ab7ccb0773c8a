#include "lifi/orientation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

double draw_family_noise(std::mt19937_64& rng, NoiseFamily family, double stddev) {
  if (stddev == 0.0) return 0.0;
  if (family == NoiseFamily::gaussian) {
    std::normal_distribution<double> dist(0.0, stddev);
    return dist(rng);
  }
  // Laplace with the requested standard deviation: scale b = sigma / sqrt(2).
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  const double u = uni(rng);
  const double b = stddev / std::numbers::sqrt2;
  return -b * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
}

}  // namespace

OrientationProcessParams polar_process_params(Activity a) {
  OrientationProcessParams p;
  p.mean_deg = activity_mean_polar_deg(a);
  p.measurement_noise_var = std::pow(10.0, kPolarNoiseVarDb / 10.0);
  if (a == Activity::sitting) {
    p.amplitude_deg = 1.88;
    p.frequency_hz = 0.67;
    p.process_noise_deg = 5.91;
    p.family = NoiseFamily::laplace;
  } else {
    p.amplitude_deg = 3.22;
    p.frequency_hz = 1.86;
    p.process_noise_deg = 7.59;
    p.family = NoiseFamily::gaussian;
  }
  return p;
}

OrientationProcessParams azimuth_process_params(Activity a) {
  OrientationProcessParams p;
  p.mean_deg = 0.0;  // conditional on the UE direction
  p.measurement_noise_var = std::pow(10.0, kAzimuthNoiseVarDb / 10.0);
  p.family = NoiseFamily::gaussian;
  if (a == Activity::sitting) {
    p.amplitude_deg = 1.31;
    p.frequency_hz = 1.46;
    p.process_noise_deg = 3.22;
  } else {
    p.amplitude_deg = 3.15;
    p.frequency_hz = 1.71;
    p.process_noise_deg = 9.48;
  }
  return p;
}

void SampledSeries::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("times and values must have equal length");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1])
      throw std::invalid_argument("times must be strictly increasing");
}

SampledSeries sample_process(const OrientationProcessParams& params,
                             const std::vector<double>& times, std::uint64_t seed) {
  if (params.amplitude_deg < 0.0 || params.frequency_hz <= 0.0 ||
      params.process_noise_deg < 0.0)
    throw std::invalid_argument("invalid process parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(-kPi, kPi);
  const double phase = phase_dist(rng);

  SampledSeries s;
  s.times = times;
  s.values.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    s.values[k] =
        params.amplitude_deg *
            std::sin(2.0 * kPi * params.frequency_hz * times[k] + phase) +
        draw_family_noise(rng, params.family, params.process_noise_deg);
  }
  s.validate();
  return s;
}

SampledSeries noisy_measurement(const OrientationProcessParams& params,
                                const std::vector<double>& times, std::uint64_t seed) {
  SampledSeries s = sample_process(params, times, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, std::sqrt(params.measurement_noise_var));
  for (double& v : s.values) v = params.mean_deg + v + noise(rng);
  return s;
}

double theoretical_acf(const OrientationProcessParams& params, double tau) {
  if (tau < 0.0) throw std::invalid_argument("lag must be >= 0");
  double r = 0.5 * params.amplitude_deg * params.amplitude_deg *
             std::cos(2.0 * kPi * params.frequency_hz * tau);
  if (tau == 0.0) r += params.process_noise_deg * params.process_noise_deg;
  return r;
}

double theoretical_acf_normalized(const OrientationProcessParams& params, double tau) {
  const double r0 = theoretical_acf(params, 0.0);
  if (r0 <= 0.0) throw std::invalid_argument("degenerate process");
  return theoretical_acf(params, tau) / r0;
}

std::vector<double> random_sampling_times(double duration, std::uint64_t seed,
                                          const std::vector<double>& gap_weights,
                                          const std::vector<int>& gaps_ms) {
  if (duration <= 0.0) throw std::invalid_argument("duration must be positive");
  if (gap_weights.size() != gaps_ms.size() || gaps_ms.empty())
    throw std::invalid_argument("need one weight per gap");
  for (int g : gaps_ms)
    if (g < 1) throw std::invalid_argument("gaps must be >= 1 ms");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(gap_weights.begin(), gap_weights.end());
  std::vector<double> times{0.0};
  // Integer milliseconds keep the gap gcd exact.
  std::int64_t t_ms = 0;
  const auto limit = static_cast<std::int64_t>(duration * 1e3);
  for (;;) {
    t_ms += gaps_ms[pick(rng)];
    if (t_ms > limit) break;
    times.push_back(static_cast<double>(t_ms) * 1e-3);
  }
  return times;
}

std::vector<double> sample_theta_rv(const OrientationProcessParams& params, int count,
                                    std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("need at least one draw");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::vector<double> draws(count);
  for (double& d : draws)
    d = params.mean_deg + params.amplitude_deg * std::sin(phase(rng)) +
        draw_family_noise(rng, params.family, params.process_noise_deg);
  return draws;
}

double draw_ue_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  // Open at -pi: map the (measure-zero) left endpoint onto pi.
  const double w = dist(rng);
  return w == -kPi ? kPi : w;
}

double sample_ue_direction(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return draw_ue_direction(rng);
}

void write_series_csv(const SampledSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "time_s,value_deg\n";
  char line[80];
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g\n", series.times[k],
                  series.values[k]);
    out << line;
  }
}

SampledSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  SampledSeries s;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, v;
    if (!std::getline(row, t, ',') || !std::getline(row, v, ','))
      throw std::runtime_error("malformed series row: " + line);
    s.times.push_back(std::stod(t));
    s.values.push_back(std::stod(v));
  }
  s.validate();
  return s;
}

}  // namespace lifi
