#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "hybridzoom/error.hpp"
#include "hybridzoom/pipeline.hpp"

namespace hz {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 2,
  kExitConfig = 3,
  kExitMetadata = 4,
  kExitFusionSkipped = 5,
  kExitUsage = 64,
};

int exit_code_for(ErrorKind kind);

struct FuseOptions {
  std::filesystem::path wide;
  std::filesystem::path tele;
  std::filesystem::path meta;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> dump_dir;
  // "-" prints to stdout, anything else is a file path.
  std::optional<std::string> timings_json;
  std::optional<int> threads;  // overrides the config value
};

/// Loads inputs, runs the pipeline, writes the result (and dumps). Errors are
/// reported on `err` and mapped to exit codes; nothing is written on failure.
int run_fuse(const FuseOptions& opts, std::ostream& out, std::ostream& err,
             StageTimings* timings = nullptr);

/// Writes wide.png, tele.png, meta.json, gt.png, gt_flow.flo,
/// gt_occlusion.png and gt_defocus.png into out_dir.
int run_simulate(const std::filesystem::path& scene_json,
                 const std::filesystem::path& out_dir, std::ostream& err);

struct BenchOptions {
  std::filesystem::path pair_dir;
  std::optional<std::filesystem::path> config;
  int repeats = 3;
  std::optional<int> threads;
};

/// Each pair is a directory with wide.png, tele.png and meta.json; pair_dir
/// is either one pair or a directory of pairs. Prints median per-stage
/// timings per pair as JSON.
int run_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

/// Median of each stage over the given runs.
StageTimings median_timings(const std::vector<StageTimings>& runs);

/// argv front end: `hzsr fuse|simulate|bench ...`.
int cli_main(int argc, char** argv);

}  // namespace hz
