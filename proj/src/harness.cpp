#include "lifi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lifi/parallel.hpp"

namespace lifi {

namespace {

constexpr double kPi = std::numbers::pi;

// Horizontal UE distances from the luminaire axis for the corner placements,
// chosen so the quoted incidence angles come out of the placement rule.
constexpr double kCornerFacingInRadius = 1.66;   // configuration 4
constexpr double kCornerFacingOutRadius = 2.5;   // configuration 5

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", *v);
  return buf;
}

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Scene user_scene(Activity activity, const Vec2& ue_xy, const Vec2& facing,
                 const Room& room, const AccessPoint& ap) {
  // Invert the placement rule: the chest sits 0.35 m behind the UE, the
  // anchor half a shoulder span to the chest's left.
  BodyPrism probe;  // default dims, only the footprint math is needed
  const Vec2 chest = ue_xy - 0.35 * facing;
  const Vec2 lateral{-facing.y(), facing.x()};
  const Vec2 anchor = chest - 0.5 * probe.length * lateral;
  return build_scene(activity, anchor, std::atan2(facing.y(), facing.x()), room, ap);
}

}  // namespace

std::vector<double> ofdm_frequency_grid(const OfdmLinkConfig& config) {
  const double fs = sampling_rate(config).sample_rate;
  const int n = config.num_subcarriers;
  std::vector<double> grid(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) grid[k] = k * fs / n;
  return grid;
}

std::vector<Scene> fixed_configurations(Activity activity, const Room& room,
                                        const AccessPoint& ap) {
  std::vector<Scene> scenes;
  scenes.reserve(5);

  // 1: back against the +y wall, centered on the luminaire axis.
  scenes.push_back(build_scene(activity, {-0.33, 0.5 * room.width - 0.2}, -0.5 * kPi,
                               room, ap));
  // 2: facing the -y wall from 1.7 m out; the standing body shadows the link.
  scenes.push_back(user_scene(activity, {0.0, -1.7}, {0.0, -1.0}, room, ap));
  // 3: underneath the luminaire.
  scenes.push_back(user_scene(activity, {0.0, 0.0}, {0.0, 1.0}, room, ap));
  // 4: toward the (+x, +y) corner, facing the room center.
  const Vec2 corner{0.5 * room.length, 0.5 * room.width};
  const Vec2 out = corner.normalized();
  scenes.push_back(
      user_scene(activity, kCornerFacingInRadius * out, -out, room, ap));
  // 5: deep in the (-x, +y) corner, facing it.
  const Vec2 corner5{-0.5 * room.length, 0.5 * room.width};
  const Vec2 out5 = corner5.normalized();
  scenes.push_back(
      user_scene(activity, kCornerFacingOutRadius * out5, out5, room, ap));
  return scenes;
}

FixedReport run_fixed(const FixedRunConfig& config) {
  FixedReport report;
  const std::vector<double> grid = ofdm_frequency_grid(config.ofdm);
  for (Activity activity : {Activity::sitting, Activity::walking}) {
    const std::vector<Scene> scenes = fixed_configurations(activity);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const ChannelResponse full =
          cir_response(scenes[i], grid, config.resolution, config.workers);
      const ChannelResponse los = full.los_only();
      const bool los_exists = full.dc_los() > 0.0;
      for (double cutoff : config.led_cutoffs_hz) {
        OfdmLinkConfig ofdm = config.ofdm;
        ofdm.led_cutoff = cutoff;
        FixedCaseResult r;
        r.configuration = static_cast<int>(i) + 1;
        r.activity = activity;
        r.led_cutoff_hz = cutoff;
        r.dc_los = full.dc_los();
        r.dc_diffuse = full.dc_diffuse();
        r.los_ratio = full.dc_cir() > 0.0 ? los_power_ratio(full)
                                          : std::numeric_limits<double>::quiet_NaN();
        r.los_exists = los_exists;
        r.snr_target_full_db = snr_target_db(ofdm, full, config.target_ber);
        if (los_exists) {
          r.snr_target_los_db = snr_target_db(ofdm, los, config.target_ber);
          r.penalty_db = r.snr_target_full_db - *r.snr_target_los_db;
        }
        report.cases.push_back(r);
      }
    }
  }
  return report;
}

CdfTable make_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  CdfTable table;
  table.values = std::move(values);
  table.probability.resize(table.values.size());
  const auto n = static_cast<double>(table.values.size());
  for (std::size_t i = 0; i < table.probability.size(); ++i)
    table.probability[i] = static_cast<double>(i + 1) / n;
  return table;
}

MonteCarloReport run_monte_carlo(const MonteCarloConfig& config) {
  if (config.samples < 1) throw std::invalid_argument("need at least one sample");
  MonteCarloReport report;
  report.config = config;
  report.records.resize(config.samples);

  OfdmLinkConfig ofdm = config.ofdm;
  ofdm.led_cutoff = config.led_cutoff_hz;
  const std::vector<double> grid = ofdm_frequency_grid(ofdm);
  const OrientationProcessParams polar = polar_process_params(config.activity);

  parallel_for(
      static_cast<std::size_t>(config.samples),
      [&](std::size_t idx) {
        std::mt19937_64 rng(splitmix64(config.seed ^ (0x51a3u + idx * 2654435761ULL)));
        std::uniform_real_distribution<double> ux(-0.5 * config.room.length,
                                                  0.5 * config.room.length);
        std::uniform_real_distribution<double> uy(-0.5 * config.room.width,
                                                  0.5 * config.room.width);
        std::uniform_real_distribution<double> uphase(-kPi, kPi);
        SampleRecord rec;
        rec.index = static_cast<int>(idx);
        rec.failed = true;

        Scene scene;
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
          const Vec2 anchor{ux(rng), uy(rng)};
          const double direction = draw_ue_direction(rng);
          double polar_deg;
          do {
            const double u = uphase(rng);
            std::normal_distribution<double> gauss(0.0, polar.process_noise_deg);
            double noise;
            if (polar.family == NoiseFamily::gaussian) {
              noise = gauss(rng);
            } else {
              std::uniform_real_distribution<double> uni(-0.5, 0.5);
              const double t = uni(rng);
              noise = -polar.process_noise_deg / std::numbers::sqrt2 *
                      std::copysign(std::log1p(-2.0 * std::abs(t)), t);
            }
            polar_deg = polar.mean_deg + polar.amplitude_deg * std::sin(u) + noise;
          } while (polar_deg < 0.0 || polar_deg > 90.0);
          try {
            scene = build_scene(config.activity, anchor, direction, config.room,
                                config.ap, polar_deg * kPi / 180.0);
            placed = true;
            rec.anchor_x = anchor.x();
            rec.anchor_y = anchor.y();
            rec.direction_rad = direction;
            rec.polar_rad = polar_deg * kPi / 180.0;
          } catch (const std::invalid_argument&) {
            // body or UE clipped a wall: draw a fresh placement
          }
        }
        if (!placed) {
          report.records[idx] = rec;
          return;
        }

        try {
          const ChannelResponse full = cir_response(scene, grid, config.resolution, 1);
          rec.dc_full = full.dc_cir();
          rec.dc_los = full.dc_los();
          rec.los_exists = rec.dc_los > 0.0;
          rec.los_ratio = rec.dc_full > 0.0 ? rec.dc_los / rec.dc_full
                                            : std::numeric_limits<double>::quiet_NaN();
          rec.snr_target_full_db = snr_target_db(ofdm, full, config.target_ber);
          if (rec.los_exists) {
            rec.snr_target_los_db =
                snr_target_db(ofdm, full.los_only(), config.target_ber);
            rec.penalty_db = rec.snr_target_full_db - *rec.snr_target_los_db;
          }
          rec.failed = false;
        } catch (const std::exception&) {
          rec.failed = true;
        }
        report.records[idx] = rec;
      },
      config.workers);

  std::vector<double> penalties, dc_full_sq, dc_los_sq;
  int ok = 0, los = 0, below3 = 0;
  for (const SampleRecord& r : report.records) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    ++ok;
    dc_full_sq.push_back(r.dc_full * r.dc_full);
    dc_los_sq.push_back(r.dc_los * r.dc_los);
    if (r.los_exists) ++los;
    if (r.penalty_db) {
      penalties.push_back(*r.penalty_db);
      if (*r.penalty_db < 3.0) ++below3;
    }
  }
  if (ok > 0) report.p_los_exists = static_cast<double>(los) / ok;
  if (!penalties.empty())
    report.p_penalty_below_3db = static_cast<double>(below3) / penalties.size();
  report.penalty_cdf = make_cdf(std::move(penalties));
  report.dc_full_cdf = make_cdf(std::move(dc_full_sq));
  report.dc_los_cdf = make_cdf(std::move(dc_los_sq));
  return report;
}

namespace {

void write_cdf_csv(const CdfTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "value,cdf\n";
  for (std::size_t i = 0; i < table.values.size(); ++i)
    out << format_num(table.values[i]) << ',' << format_num(table.probability[i])
        << '\n';
}

}  // namespace

std::string config_digest(const MonteCarloConfig& config) {
  std::ostringstream s;
  s << to_string(config.activity) << '|' << config.samples << '|' << config.seed
    << '|' << config.resolution << '|' << config.led_cutoff_hz << '|'
    << config.target_ber << '|' << config.room.length << 'x' << config.room.width
    << 'x' << config.room.height << '|' << config.ofdm.num_subcarriers << '|'
    << config.ofdm.used_subcarriers << '|' << config.ofdm.qam_order;
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : s.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void export_report(const MonteCarloReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);

  {
    std::ofstream out(dir / "records.csv");
    if (!out) throw std::runtime_error("cannot open records.csv under " + directory);
    out << "index,anchor_x,anchor_y,direction_rad,polar_rad,dc_full,dc_los,"
           "los_ratio,los_exists,snr_target_full_db,snr_target_los_db,penalty_db,"
           "failed\n";
    for (const SampleRecord& r : report.records) {
      out << r.index << ',' << format_num(r.anchor_x) << ',' << format_num(r.anchor_y)
          << ',' << format_num(r.direction_rad) << ',' << format_num(r.polar_rad)
          << ',' << format_num(r.dc_full) << ',' << format_num(r.dc_los) << ','
          << format_num(r.los_ratio) << ',' << (r.los_exists ? 1 : 0) << ','
          << format_num(r.snr_target_full_db) << ',' << format_opt(r.snr_target_los_db)
          << ',' << format_opt(r.penalty_db) << ',' << (r.failed ? 1 : 0) << '\n';
    }
  }
  write_cdf_csv(report.penalty_cdf, (dir / "penalty_cdf.csv").string());
  write_cdf_csv(report.dc_full_cdf, (dir / "dc_gain_full_cdf.csv").string());
  write_cdf_csv(report.dc_los_cdf, (dir / "dc_gain_los_cdf.csv").string());

  nlohmann::json j;
  j["seed"] = report.config.seed;
  j["config_digest"] = config_digest(report.config);
  j["activity"] = to_string(report.config.activity);
  j["samples"] = report.config.samples;
  j["failures"] = report.failures;
  j["resolution"] = report.config.resolution;
  j["led_cutoff_hz"] = report.config.led_cutoff_hz;
  j["p_los_exists"] = report.p_los_exists;
  j["p_penalty_below_3db"] = report.p_penalty_below_3db;
  std::ofstream out(dir / "summary.json");
  if (!out) throw std::runtime_error("cannot open summary.json under " + directory);
  out << j.dump(2) << "\n";
}

void export_report(const FixedReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::ofstream out(fs::path(directory) / "fixed_cases.csv");
  if (!out) throw std::runtime_error("cannot open fixed_cases.csv under " + directory);
  out << "configuration,activity,led_cutoff_hz,dc_los,dc_diffuse,los_ratio_percent,"
         "los_exists,snr_target_full_db,snr_target_los_db,penalty_db\n";
  for (const FixedCaseResult& r : report.cases) {
    out << r.configuration << ',' << to_string(r.activity) << ','
        << format_num(r.led_cutoff_hz) << ',' << format_num(r.dc_los) << ','
        << format_num(r.dc_diffuse) << ',' << format_num(100.0 * r.los_ratio) << ','
        << (r.los_exists ? 1 : 0) << ',' << format_num(r.snr_target_full_db) << ','
        << format_opt(r.snr_target_los_db) << ',' << format_opt(r.penalty_db) << '\n';
  }
}

}  // namespace lifi
