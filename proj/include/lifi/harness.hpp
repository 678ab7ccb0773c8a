#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lifi/channel.hpp"
#include "lifi/ofdm.hpp"
#include "lifi/orientation.hpp"

namespace lifi {

/// Channel grid matching the OFDM DFT bins: k f_s / N for k = 0..N/2.
std::vector<double> ofdm_frequency_grid(const OfdmLinkConfig& config);

/// The five study placements (anchor, direction) for one activity:
///  1 back against the far side wall, LOS clear at a steep incidence
///  2 near the opposite wall facing it, the body shadows the standing link
///  3 directly underneath the luminaire
///  4 toward a room corner facing the center
///  5 deep in a corner facing it, LOS shadowed for both postures
std::vector<Scene> fixed_configurations(Activity activity, const Room& room = Room{},
                                        const AccessPoint& ap = AccessPoint{});

struct FixedRunConfig {
  std::vector<double> led_cutoffs_hz{40e6, 20e6};
  double resolution = 2.0;
  double target_ber = 3.8e-3;
  OfdmLinkConfig ofdm;
  unsigned workers = 0;
};

struct FixedCaseResult {
  int configuration;  // 1..5
  Activity activity;
  double led_cutoff_hz;
  double dc_los;
  double dc_diffuse;
  double los_ratio;  // optical, NaN when the total gain vanishes
  bool los_exists;
  double snr_target_full_db;
  std::optional<double> snr_target_los_db;
  std::optional<double> penalty_db;
};

struct FixedReport {
  std::vector<FixedCaseResult> cases;
};

FixedReport run_fixed(const FixedRunConfig& config);

struct MonteCarloConfig {
  Activity activity = Activity::walking;
  int samples = 1000;
  std::uint64_t seed = 1;
  double resolution = 1.5;  // coarser than the fixed study: one dense solve
                            // per frequency and sample
  double led_cutoff_hz = 40e6;
  double target_ber = 3.8e-3;
  OfdmLinkConfig ofdm;
  Room room;
  AccessPoint ap;
  unsigned workers = 0;
};

struct SampleRecord {
  int index;
  double anchor_x, anchor_y;
  double direction_rad;
  double polar_rad;
  double dc_full;
  double dc_los;
  double los_ratio;
  bool los_exists;
  double snr_target_full_db;
  std::optional<double> snr_target_los_db;
  std::optional<double> penalty_db;
  bool failed = false;
};

struct CdfTable {
  std::vector<double> values;  // sorted
  std::vector<double> probability;
};

CdfTable make_cdf(std::vector<double> values);

struct MonteCarloReport {
  MonteCarloConfig config;
  std::vector<SampleRecord> records;
  double p_los_exists = 0.0;
  double p_penalty_below_3db = 0.0;
  CdfTable penalty_cdf;       // LOS-existing samples only
  CdfTable dc_full_cdf;       // |H_CIR(0)|^2, all samples
  CdfTable dc_los_cdf;        // LOS-only gain, all samples
  int failures = 0;
};

MonteCarloReport run_monte_carlo(const MonteCarloConfig& config);

/// CSV per-sample records + CSV CDF tables + JSON summary.  Re-running with
/// the same seed reproduces the files byte for byte.
void export_report(const MonteCarloReport& report, const std::string& directory);
void export_report(const FixedReport& report, const std::string& directory);

std::string config_digest(const MonteCarloConfig& config);

}  // namespace lifi
