#include "hybridzoom/cli.hpp"

#include <algorithm>
#include <iostream>

#include <omp.h>

#include "CLI11.hpp"
#include "hybridzoom/config.hpp"
#include "hybridzoom/io.hpp"
#include "hybridzoom/rig_sim.hpp"
#include "json.hpp"

namespace hz {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Metadata:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidInput: return kExitMetadata;
  }
  return kExitMetadata;
}

namespace {

void apply_threads(std::optional<int> cli_threads, int cfg_threads) {
  const int n = cli_threads.value_or(cfg_threads);
  if (n > 0) omp_set_num_threads(n);
}

PipelineConfig config_or_default(const std::optional<fs::path>& path) {
  return path ? load_config(*path) : PipelineConfig{};
}

void write_dumps(const fs::path& dir, const PipelineResult& r,
                 const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string());
  if (cfg.dump_images) {
    write_png16(dir / "i_src.png", r.i_src);
    write_png16(dir / "i_ref_warped.png", r.i_ref_warped);
  }
  if (cfg.dump_masks) {
    write_mask_png8(dir / "m_occ.png", r.m_occ);
    write_mask_png8(dir / "m_defocus.png", r.m_defocus);
    write_mask_png8(dir / "m_flow.png", r.m_flow);
    write_mask_png8(dir / "m_reject.png", r.m_reject);
    write_mask_png8(dir / "m_blend.png", r.m_blend);
  }
  if (cfg.dump_flow) {
    write_flo(dir / "flow_fwd.flo", r.fwd);
    write_logvar(dir / "flow_fwd.logvar", r.fwd);
    write_flo(dir / "flow_bwd.flo", r.bwd);
    write_logvar(dir / "flow_bwd.logvar", r.bwd);
  }
}

void emit_timings(const std::string& target, const StageTimings& t,
                  std::ostream& out) {
  const std::string text = timings_to_json(t) + "\n";
  if (target == "-") {
    out << text;
  } else {
    write_text(target, text);
  }
}

struct PairPaths {
  std::string name;
  fs::path dir;
};

bool is_pair_dir(const fs::path& dir) {
  return fs::exists(dir / "wide.png") && fs::exists(dir / "tele.png") &&
         fs::exists(dir / "meta.json");
}

std::vector<PairPaths> find_pairs(const fs::path& root) {
  std::vector<PairPaths> pairs;
  if (is_pair_dir(root)) {
    pairs.push_back({root.filename().string(), root});
    return pairs;
  }
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root, ec))
    if (entry.is_directory() && is_pair_dir(entry.path()))
      pairs.push_back({entry.path().filename().string(), entry.path()});
  if (ec) throw Error(ErrorKind::Io, "cannot list " + root.string());
  std::sort(pairs.begin(), pairs.end(),
            [](const PairPaths& a, const PairPaths& b) { return a.name < b.name; });
  if (pairs.empty()) throw Error(ErrorKind::Io, "no W/T pairs under " + root.string());
  return pairs;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::ordered_json timings_json_value(const StageTimings& t) {
  return nlohmann::ordered_json::parse(timings_to_json(t));
}

}  // namespace

StageTimings median_timings(const std::vector<StageTimings>& runs) {
  require(!runs.empty(), ErrorKind::InvalidInput, "no timing runs");
  auto field = [&](double StageTimings::*m) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*m);
    return median(std::move(v));
  };
  StageTimings t;
  for (auto m : {&StageTimings::color_matching, &StageTimings::coarse_alignment,
                 &StageTimings::optical_flow, &StageTimings::warping,
                 &StageTimings::occlusion_map, &StageTimings::defocus_map,
                 &StageTimings::rejection_map, &StageTimings::fusion,
                 &StageTimings::blending, &StageTimings::total})
    t.*m = field(m);
  return t;
}

int run_fuse(const FuseOptions& opts, std::ostream& out, std::ostream& err,
             StageTimings* timings) {
  try {
    const PipelineConfig cfg = config_or_default(opts.config);
    if (opts.threads && *opts.threads < 0)
      throw Error(ErrorKind::Config, "--threads must be >= 0");
    apply_threads(opts.threads, cfg.threads);
    const CameraMeta meta = load_meta(opts.meta);
    const PlanarImage wide = read_image(opts.wide);
    const PlanarImage tele = read_image(opts.tele);
    if (wide.channels() != 3 || tele.channels() != 3)
      throw Error(ErrorKind::DimensionMismatch, "W and T must be color images");

    const bool warp_color = opts.dump_dir && cfg.dump_images;
    const PipelineResult r = run_pipeline(wide, tele, meta, cfg, warp_color);
    if (timings) *timings = r.timings;
    if (r.fusion_skipped) {
      err << "coarse alignment has low confidence (" << r.translation.matches
          << " matches); fusion skipped, W copied\n";
      write_png16(opts.out, r.output);
      if (opts.timings_json) emit_timings(*opts.timings_json, r.timings, out);
      return kExitFusionSkipped;
    }
    if (opts.dump_dir) write_dumps(*opts.dump_dir, r, cfg);
    write_png16(opts.out, r.output);
    if (opts.timings_json) emit_timings(*opts.timings_json, r.timings, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

int run_simulate(const fs::path& scene_json, const fs::path& out_dir,
                 std::ostream& err) {
  try {
    RigScene scene;
    try {
      scene = load_scene(scene_json);
      validate_scene(scene);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Io) throw;
      throw Error(ErrorKind::Config, e.what());
    }
    const SyntheticPair pair = synthesize_pair(scene);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string());
    write_png16(out_dir / "wide.png", pair.wide);
    write_png16(out_dir / "tele.png", pair.tele);
    write_text(out_dir / "meta.json", meta_to_json(pair.meta) + "\n");
    write_png16(out_dir / "gt.png", pair.labels.gt_image);
    write_flo(out_dir / "gt_flow.flo", pair.labels.gt_flow);
    write_mask_png8(out_dir / "gt_occlusion.png", pair.labels.gt_occlusion);
    write_mask_png8(out_dir / "gt_defocus.png", pair.labels.gt_defocus_region);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.repeats < 1) throw Error(ErrorKind::Config, "--repeats must be >= 1");
    const PipelineConfig cfg = config_or_default(opts.config);
    apply_threads(opts.threads, cfg.threads);

    nlohmann::ordered_json report;
    report["threads"] = omp_get_max_threads();
    report["repeats"] = opts.repeats;
    report["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : find_pairs(opts.pair_dir)) {
      const CameraMeta meta = load_meta(p.dir / "meta.json");
      const PlanarImage wide = read_image(p.dir / "wide.png");
      const PlanarImage tele = read_image(p.dir / "tele.png");
      std::vector<StageTimings> runs;
      bool skipped = false;
      for (int i = 0; i < opts.repeats; ++i) {
        const PipelineResult r = run_pipeline(wide, tele, meta, cfg);
        skipped = r.fusion_skipped;
        runs.push_back(r.timings);
      }
      nlohmann::ordered_json entry;
      entry["name"] = p.name;
      entry["wide"] = {wide.width(), wide.height()};
      entry["tele"] = {tele.width(), tele.height()};
      entry["fusion_skipped"] = skipped;
      entry["median_ms"] = timings_json_value(median_timings(runs));
      report["pairs"].push_back(std::move(entry));
    }
    out << report.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Hybrid-zoom W/T fusion"};
  app.require_subcommand(1);

  FuseOptions fuse;
  std::string config, dump_dir, timings;
  int threads = -1;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a W/T pair");
  fuse_cmd->add_option("--wide", fuse.wide, "Wide image")->required();
  fuse_cmd->add_option("--tele", fuse.tele, "Tele image")->required();
  fuse_cmd->add_option("--meta", fuse.meta, "Camera metadata JSON")->required();
  fuse_cmd->add_option("--config", config, "Pipeline config JSON");
  fuse_cmd->add_option("--out", fuse.out, "Output 16-bit PNG")->required();
  fuse_cmd->add_option("--dump-dir", dump_dir, "Write intermediates here");
  fuse_cmd->add_option("--timings-json", timings, "Stage timings: path or -");
  fuse_cmd->add_option("--threads", threads, "Worker threads (0: default)");

  std::string scene, out_dir;
  auto* sim_cmd = app.add_subcommand("simulate", "Render a synthetic W/T pair");
  sim_cmd->add_option("--scene", scene, "Scene JSON")->required();
  sim_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  BenchOptions bench;
  std::string bench_config;
  int bench_threads = -1;
  auto* bench_cmd = app.add_subcommand("bench", "Per-stage latency benchmark");
  bench_cmd->add_option("--pair-dir", bench.pair_dir, "Pair or directory of pairs")
      ->required();
  bench_cmd->add_option("--config", bench_config, "Pipeline config JSON");
  bench_cmd->add_option("--repeats", bench.repeats, "Runs per pair");
  bench_cmd->add_option("--threads", bench_threads, "Worker threads (0: default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (*fuse_cmd) {
    if (!config.empty()) fuse.config = config;
    if (!dump_dir.empty()) fuse.dump_dir = dump_dir;
    if (!timings.empty()) fuse.timings_json = timings;
    if (threads >= 0 || fuse_cmd->count("--threads")) fuse.threads = threads;
    return run_fuse(fuse, std::cout, std::cerr);
  }
  if (*sim_cmd) return run_simulate(scene, out_dir, std::cerr);
  if (!bench_config.empty()) bench.config = bench_config;
  if (bench_cmd->count("--threads")) bench.threads = bench_threads;
  return run_bench(bench, std::cout, std::cerr);
}

}  // namespace hz
