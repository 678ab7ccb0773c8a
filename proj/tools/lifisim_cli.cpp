// Command-line front end: scene channels, link budgets, time-domain BER,
// orientation synthesis/recovery, the fixed-placement study and the
// random-placement Monte Carlo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lifi/channel.hpp"
#include "lifi/harness.hpp"
#include "lifi/ofdm.hpp"
#include "lifi/orientation.hpp"
#include "lifi/scene_io.hpp"
#include "lifi/spectral.hpp"

namespace {

using namespace lifi;

struct SceneArgs {
  std::string scene_file;
  int fixed_index = 0;  // 1..5
  std::string activity = "walking";
};

void add_scene_options(CLI::App* cmd, SceneArgs& args) {
  auto* file = cmd->add_option("--scene", args.scene_file, "scene config file");
  auto* fixed = cmd->add_option("--fixed", args.fixed_index,
                                "fixed study configuration (1..5)")
                    ->check(CLI::Range(1, 5));
  cmd->add_option("--activity", args.activity, "sitting | walking")
      ->check(CLI::IsMember({"sitting", "walking"}));
  file->excludes(fixed);
}

Scene resolve_scene(const SceneArgs& args) {
  if (!args.scene_file.empty()) return load_scene(args.scene_file);
  if (args.fixed_index < 1)
    throw CLI::ValidationError("scene", "need --scene or --fixed");
  const auto scenes = fixed_configurations(activity_from_string(args.activity));
  return scenes[args.fixed_index - 1];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor optical wireless link simulator"};
  app.require_subcommand(1);

  unsigned workers = 0;
  app.add_option("--threads", workers, "worker threads (0: all cores)");

  // --- cir ---------------------------------------------------------------
  auto* cir = app.add_subcommand("cir", "channel frequency response to CSV");
  SceneArgs cir_scene;
  add_scene_options(cir, cir_scene);
  double cir_resolution = 2.0;
  std::string cir_out = "cir.csv";
  cir->add_option("--resolution", cir_resolution, "surface elements per meter");
  cir->add_option("--out", cir_out, "output CSV");
  cir->callback([&] {
    const Scene scene = resolve_scene(cir_scene);
    const ChannelResponse response =
        cir_response(scene, ofdm_frequency_grid(OfdmLinkConfig{}), cir_resolution,
                     workers);
    write_channel_csv(response, cir_out);
    std::printf("dc_los %.6g  dc_diffuse %.6g  los_ratio %.4g%%\n", response.dc_los(),
                response.dc_diffuse(), 100.0 * los_power_ratio(response));
  });

  // --- link --------------------------------------------------------------
  auto* link = app.add_subcommand("link", "per-subcarrier SNR/BER report");
  SceneArgs link_scene;
  add_scene_options(link, link_scene);
  double link_resolution = 2.0;
  double led_cutoff_mhz = 40.0;
  double target_ber = 3.8e-3;
  bool los_only = false;
  std::string link_out = "link.csv";
  link->add_option("--led-cutoff-mhz", led_cutoff_mhz, "LED cutoff (MHz)");
  link->add_option("--target-ber", target_ber, "target average BER");
  link->add_flag("--los-only", los_only, "drop the diffuse part");
  link->add_option("--resolution", link_resolution, "surface elements per meter");
  link->add_option("--out", link_out, "output CSV");
  link->callback([&] {
    const Scene scene = resolve_scene(link_scene);
    OfdmLinkConfig config;
    config.led_cutoff = led_cutoff_mhz * 1e6;
    ChannelResponse response =
        cir_response(scene, ofdm_frequency_grid(config), link_resolution, workers);
    if (los_only) response = response.los_only();
    const double snr_t = snr_target_db(config, response, target_ber);
    const LinkReport report = make_link_report(config, response, snr_t, los_only);
    write_link_report_csv(report, link_out);
    std::printf("snr_target_db %.4f  average_ber %.4g  (%s)\n", snr_t,
                report.average_ber, los_only ? "los-only" : "full");
  });

  // --- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "time-domain BER points");
  SceneArgs sim_scene;
  add_scene_options(sim, sim_scene);
  std::vector<double> snr_points;
  int symbols = 20000;
  std::uint64_t sim_seed = 1;
  double sim_resolution = 2.0;
  double sim_led_mhz = 40.0;
  bool sim_los_only = false;
  std::string sim_out = "ber_points.csv";
  sim->add_option("--snr-db", snr_points, "received SNR points (dB)")->required();
  sim->add_option("--symbols", symbols, "OFDM symbols per point");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--led-cutoff-mhz", sim_led_mhz, "LED cutoff (MHz)");
  sim->add_flag("--los-only", sim_los_only, "drop the diffuse part");
  sim->add_option("--resolution", sim_resolution, "surface elements per meter");
  sim->add_option("--out", sim_out, "output CSV");
  sim->callback([&] {
    const Scene scene = resolve_scene(sim_scene);
    OfdmLinkConfig config;
    config.led_cutoff = sim_led_mhz * 1e6;
    ChannelResponse response =
        cir_response(scene, ofdm_frequency_grid(config), sim_resolution, workers);
    if (sim_los_only) response = response.los_only();
    std::ofstream out(sim_out);
    out << "snr_db,ber_simulated,ber_analytic,bits,low_confidence\n";
    for (std::size_t i = 0; i < snr_points.size(); ++i) {
      const double snr_ref = snr_at_scale_db(config, response, 1.0);
      const double scale = std::pow(10.0, (snr_points[i] - snr_ref) / 10.0);
      const double analytic =
          ber(config, snr_per_subcarrier(config, response, scale)).average;
      const SimulationResult r =
          simulate_link(config, response, snr_points[i], symbols, sim_seed + i);
      char line[160];
      std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%llu,%d\n", snr_points[i],
                    r.bit_error_rate, analytic,
                    static_cast<unsigned long long>(r.bits),
                    r.low_confidence ? 1 : 0);
      out << line;
      std::printf("snr %.2f dB  sim %.3g  theory %.3g\n", snr_points[i],
                  r.bit_error_rate, analytic);
    }
  });

  // --- orient-gen ----------------------------------------------------------
  auto* gen = app.add_subcommand("orient-gen", "synthesize an orientation series");
  std::string gen_activity = "walking";
  std::string gen_angle = "theta";
  double duration = 60.0;
  std::uint64_t gen_seed = 1;
  double even_ms = 0.0;
  std::string gen_out = "series.csv";
  gen->add_option("--activity", gen_activity)->check(CLI::IsMember({"sitting", "walking"}));
  gen->add_option("--angle", gen_angle, "theta | omega")
      ->check(CLI::IsMember({"theta", "omega"}));
  gen->add_option("--duration", duration, "seconds");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--even-ms", even_ms, "even sampling period (default: uneven)");
  gen->add_option("--out", gen_out, "output CSV");
  gen->callback([&] {
    const Activity a = activity_from_string(gen_activity);
    const OrientationProcessParams params =
        gen_angle == "theta" ? polar_process_params(a) : azimuth_process_params(a);
    std::vector<double> times;
    if (even_ms > 0.0) {
      for (double t = 0.0; t <= duration; t += even_ms * 1e-3) times.push_back(t);
    } else {
      times = random_sampling_times(duration, gen_seed ^ 0xabcdULL);
    }
    write_series_csv(noisy_measurement(params, times, gen_seed), gen_out);
    std::printf("%zu samples over %.1f s -> %s\n", times.size(), duration,
                gen_out.c_str());
  });

  // --- orient-estimate -----------------------------------------------------
  auto* est = app.add_subcommand("orient-estimate", "recover process parameters");
  std::string est_in;
  std::string est_json = "estimate.json";
  std::string est_spectrum;
  EstimateConfig est_config;
  est->add_option("--in", est_in, "series CSV")->required();
  est->add_option("--out-json", est_json, "diagnostics JSON");
  est->add_option("--out-spectrum", est_spectrum, "cleaned periodogram CSV");
  est->add_option("--oversample", est_config.oversample);
  est->add_option("--max-frequency", est_config.max_frequency, "Hz (0: Nyquist)");
  est->add_option("--false-alarm", est_config.false_alarm_p);
  est->add_option("--clean-gain", est_config.clean_gain);
  est->add_option("--measurement-noise-var", est_config.measurement_noise_var,
                  "sensor noise variance (deg^2)");
  est->callback([&] {
    const EstimateResult result = estimate_params(read_series_csv(est_in), est_config);
    write_estimate_json(result, est_json);
    if (!est_spectrum.empty()) write_periodogram_csv(result.cleaned, est_spectrum);
    if (result.detected)
      std::printf("A %.4g deg  f %.4g Hz  sigma_v^2 %.4g deg^2  mean %.4g deg\n",
                  result.amplitude_deg, result.frequency_hz, result.process_var,
                  result.mean_deg);
    else
      std::printf("no peak above the false-alarm level (floor %.4g deg^2)\n",
                  result.diagnostics.noise_floor);
  });

  // --- fixed ---------------------------------------------------------------
  auto* fixed = app.add_subcommand("fixed", "fixed-placement study tables");
  FixedRunConfig fixed_config;
  std::string fixed_dir = "fixed_out";
  std::vector<double> cutoffs_mhz{40.0, 20.0};
  fixed->add_option("--led-cutoff-mhz", cutoffs_mhz, "LED cutoffs (MHz)");
  fixed->add_option("--resolution", fixed_config.resolution);
  fixed->add_option("--target-ber", fixed_config.target_ber);
  fixed->add_option("--out-dir", fixed_dir);
  fixed->callback([&] {
    fixed_config.led_cutoffs_hz.clear();
    for (double m : cutoffs_mhz) fixed_config.led_cutoffs_hz.push_back(m * 1e6);
    fixed_config.workers = workers;
    const FixedReport report = run_fixed(fixed_config);
    export_report(report, fixed_dir);
    for (const FixedCaseResult& r : report.cases) {
      std::printf("C%d %-7s %4.0f MHz  ratio %6.2f%%  snr_t %6.2f dB  penalty %s\n",
                  r.configuration, to_string(r.activity).c_str(),
                  r.led_cutoff_hz / 1e6, 100.0 * r.los_ratio, r.snr_target_full_db,
                  r.penalty_db ? (std::to_string(*r.penalty_db) + " dB").c_str() : "-");
    }
  });

  // --- montecarlo ----------------------------------------------------------
  auto* mc = app.add_subcommand("montecarlo", "random placements and orientations");
  MonteCarloConfig mc_config;
  std::string mc_activity = "walking";
  std::string mc_dir = "mc_out";
  double mc_led_mhz = 40.0;
  mc->add_option("--activity", mc_activity)->check(CLI::IsMember({"sitting", "walking"}));
  mc->add_option("--samples", mc_config.samples);
  mc->add_option("--seed", mc_config.seed);
  mc->add_option("--resolution", mc_config.resolution);
  mc->add_option("--led-cutoff-mhz", mc_led_mhz);
  mc->add_option("--target-ber", mc_config.target_ber);
  mc->add_option("--out-dir", mc_dir);
  mc->callback([&] {
    mc_config.activity = activity_from_string(mc_activity);
    mc_config.led_cutoff_hz = mc_led_mhz * 1e6;
    mc_config.workers = workers;
    const MonteCarloReport report = run_monte_carlo(mc_config);
    export_report(report, mc_dir);
    std::printf("samples %d  failures %d\n", mc_config.samples, report.failures);
    std::printf("P(LOS exists) = %.4f\n", report.p_los_exists);
    std::printf("P(penalty < 3 dB) = %.4f\n", report.p_penalty_below_3db);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
