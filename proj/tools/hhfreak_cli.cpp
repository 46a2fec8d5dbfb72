#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hhfreak/bench.hpp"
#include "hhfreak/detector.hpp"
#include "hhfreak/errors.hpp"
#include "hhfreak/freak.hpp"
#include "hhfreak/keypoint.hpp"
#include "hhfreak/raster.hpp"
#include "hhfreak/telemetry.hpp"

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hhfreak::IoError("cannot open " + path.string());
  return out;
}

hhfreak::DetectorConfig load_config_opt(const std::string& path) {
  if (path.empty()) return {};
  return hhfreak::load_detector_config(path);
}

int run_detect(const std::string& image_path, const std::string& config_path,
               const fs::path& out_dir) {
  const auto cfg = load_config_opt(config_path);
  const auto img = hhfreak::decode_image_file(image_path);
  const auto res = hhfreak::detect(img, cfg);

  hhfreak::write_keypoint_file(res.keypoints, (out_dir / "keypoints.txt").string());
  auto csv = open_out(out_dir / "timings.csv");
  hhfreak::emit_stage_csv(res.timings, csv);

  std::cout << res.keypoints.size() << " keypoints, characteristic sigma "
            << res.characteristic << "\n";
  for (const auto& [sigma, count] : res.corner_counts)
    std::cout << "  sigma " << sigma << ": " << count << " corners\n";
  std::cout << "wrote " << (out_dir / "keypoints.txt").string() << ", "
            << (out_dir / "timings.csv").string() << "\n";
  return 0;
}

int run_describe(const std::string& image_path, const std::string& keypoints_path,
                 const std::string& config_path, const fs::path& out_dir) {
  const auto img = hhfreak::decode_image_file(image_path);
  std::vector<hhfreak::Keypoint> kps;
  if (keypoints_path.empty()) {
    kps = hhfreak::detect(img, load_config_opt(config_path)).keypoints;
  } else {
    kps = hhfreak::parse_keypoint_file(keypoints_path);
  }
  const auto pattern = hhfreak::build_pattern();
  const auto records = hhfreak::describe_all(
      img.channels() == 1 ? img : hhfreak::desaturate(img), kps, pattern);
  hhfreak::write_descriptor_file(records, (out_dir / "descriptors.txt").string());
  std::cout << records.size() << " descriptors -> "
            << (out_dir / "descriptors.txt").string() << "\n";
  return 0;
}

int run_match(const std::string& a_path, const std::string& b_path,
              const std::vector<int>& thresholds, const fs::path& out_dir) {
  const auto a = hhfreak::parse_descriptor_file(a_path);
  const auto b = hhfreak::parse_descriptor_file(b_path);
  hhfreak::MatchPolicy policy;
  if (!thresholds.empty()) {
    if (thresholds.size() != hhfreak::kCascadeCount)
      throw std::invalid_argument("--thresholds needs exactly 4 values");
    std::copy(thresholds.begin(), thresholds.end(),
              policy.cascade_reject_thresholds.begin());
  }
  policy.validate();
  const auto matches = hhfreak::match_descriptors(a, b, policy);

  auto csv = open_out(out_dir / "matches.csv");
  std::string text = "index_a,index_b,distance\n";
  for (const auto& m : matches)
    text += std::to_string(m.index_a) + "," + std::to_string(m.index_b) + "," +
            std::to_string(m.distance) + "\n";
  csv.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::cout << matches.size() << " of " << a.size() << " descriptors matched -> "
            << (out_dir / "matches.csv").string() << "\n";
  return 0;
}

int run_bench(const std::string& image_path, int runs, const std::string& config_path,
              const fs::path& out_dir) {
  hhfreak::BenchConfig cfg;
  cfg.runs = runs;
  cfg.detector = load_config_opt(config_path);
  const auto img = hhfreak::decode_image_file(image_path);
  const auto report = hhfreak::bench_pipeline(img, cfg);

  auto csv = open_out(out_dir / "bench.csv");
  hhfreak::emit_timing_csv(report, csv);

  std::cout << "total: " << report.total.mean_s << " s mean over " << report.runs
            << " runs (std " << report.total.std_s << ", min " << report.total.min_s
            << ", max " << report.total.max_s << ")\n"
            << "wrote " << (out_dir / "bench.csv").string() << "\n";
  if (!report.outputs_identical) {
    std::cerr << "bench: keypoint outputs differed between runs\n";
    return 1;
  }
  return 0;
}

int run_sweep(const std::string& image_path, std::vector<std::string> stages,
              int runs, int max_area, double sigma, const fs::path& out_dir) {
  hhfreak::BenchConfig cfg;
  cfg.runs = runs;
  cfg.max_tile_area = max_area;
  cfg.sweep_sigma = sigma;
  if (!stages.empty()) cfg.stages = std::move(stages);
  const auto img = hhfreak::decode_image_file(image_path);
  const auto report = hhfreak::sweep_workgroups(img, cfg);

  auto csv = open_out(out_dir / "sweep.csv");
  hhfreak::emit_csv(report, csv);
  for (const std::string& stage : cfg.stages) {
    auto grid = open_out(out_dir / ("heatmap_" + stage + ".dat"));
    hhfreak::emit_heatmap(report, stage, grid);
  }

  for (const auto& skip : report.skipped)
    std::cerr << "skipped " << skip.stage << " " << skip.tile.tile_w << "x"
              << skip.tile.tile_h << ": " << skip.reason << "\n";
  for (const std::string& stage : cfg.stages) {
    const auto* best = report.best(stage);
    const auto* worst = report.worst(stage);
    std::cout << stage << ": best " << best->tile.tile_w << "x" << best->tile.tile_h
              << " (" << best->stats.mean_s << " s), worst " << worst->tile.tile_w
              << "x" << worst->tile.tile_h << " (" << worst->stats.mean_s << " s)\n";
  }
  std::cout << "wrote " << (out_dir / "sweep.csv").string() << "\n";
  return 0;
}

int run_telemetry(const std::string& trace_path, const hhfreak::AnalyzeParams& params,
                  const fs::path& out_dir) {
  const auto parsed = hhfreak::parse_trace_file(trace_path);
  for (const auto& rej : parsed.rejected)
    std::cerr << "rejected line " << rej.line << ": " << rej.reason << "\n";

  const auto analysis = hhfreak::analyze(parsed.traces, params);
  auto csv = open_out(out_dir / "events.csv");
  hhfreak::emit_events_csv(analysis.events, csv);

  std::cout << hhfreak::analysis_summary(analysis);
  std::cout << "wrote " << (out_dir / "events.csv").string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harris-Hessian + FREAK feature toolkit"};
  app.require_subcommand(1);

  std::string image_path, config_path, keypoints_path, a_path, b_path, trace_path;
  std::string out_dir = ".";
  std::vector<std::string> stages;
  std::vector<int> thresholds;
  int runs = 10;
  int max_area = hhfreak::kLargeDeviceMaxTileArea;
  double sigma = 20.0;
  hhfreak::AnalyzeParams params;

  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  };

  auto* detect = app.add_subcommand("detect", "detect keypoints in an image");
  detect->add_option("image", image_path, "PGM/PPM image")->required();
  detect->add_option("--config", config_path, "detector key=value config file");
  add_out(detect);

  auto* describe = app.add_subcommand("describe", "compute FREAK descriptors");
  describe->add_option("image", image_path, "PGM/PPM image")->required();
  describe->add_option("--keypoints", keypoints_path,
                       "keypoint file (default: run the detector)");
  describe->add_option("--config", config_path, "detector key=value config file");
  add_out(describe);

  auto* match = app.add_subcommand("match", "match two descriptor files");
  match->add_option("a", a_path, "descriptor file A")->required();
  match->add_option("b", b_path, "descriptor file B")->required();
  match->add_option("--thresholds", thresholds,
                    "four cascade reject thresholds (cumulative)");
  add_out(match);

  auto* bench = app.add_subcommand("bench", "time the full pipeline");
  bench->add_option("image", image_path, "PGM/PPM image")->required();
  bench->add_option("--runs", runs, "timed runs after one warm-up")
      ->capture_default_str();
  bench->add_option("--config", config_path, "detector key=value config file");
  add_out(bench);

  auto* sweep = app.add_subcommand("sweep", "sweep work-group (tile) sizes");
  sweep->add_option("image", image_path, "PGM/PPM image")->required();
  sweep->add_option("--stage", stages, "stages to sweep (default gaussx gaussy)");
  sweep->add_option("--runs", runs, "timed runs per config")->capture_default_str();
  sweep->add_option("--max-area", max_area, "tile area cap")->capture_default_str();
  sweep->add_option("--sigma", sigma, "gaussian sigma")->capture_default_str();
  add_out(sweep);

  auto* telemetry = app.add_subcommand("telemetry", "analyze a sensor trace CSV");
  telemetry->add_option("trace", trace_path, "CSV with header t,channel,kind,value")
      ->required();
  telemetry->add_option("--eps", params.stabilization_eps, "stabilization band")
      ->capture_default_str();
  telemetry
      ->add_option("--stab-window", params.stabilization_w, "stabilization window s")
      ->capture_default_str();
  telemetry->add_option("--step-window", params.step_w, "step detector window s")
      ->capture_default_str();
  telemetry
      ->add_option("--temp-min-delta", params.temp_min_delta, "temperature step degC")
      ->capture_default_str();
  telemetry
      ->add_option("--freq-min-delta", params.freq_min_delta, "frequency step MHz")
      ->capture_default_str();
  telemetry->add_option("--tol", params.correlate_tol, "correlation tolerance s")
      ->capture_default_str();
  add_out(telemetry);

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    const fs::path out(out_dir);
    if (detect->parsed()) return run_detect(image_path, config_path, out);
    if (describe->parsed())
      return run_describe(image_path, keypoints_path, config_path, out);
    if (match->parsed()) return run_match(a_path, b_path, thresholds, out);
    if (bench->parsed()) return run_bench(image_path, runs, config_path, out);
    if (sweep->parsed())
      return run_sweep(image_path, stages, runs, max_area, sigma, out);
    if (telemetry->parsed()) return run_telemetry(trace_path, params, out);
  } catch (const std::exception& e) {
    std::cerr << "hhfreak: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
