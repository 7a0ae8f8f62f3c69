#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hybridzoom/coarse_align.hpp"
#include "hybridzoom/dense_flow.hpp"
#include "hybridzoom/masks.hpp"
#include "hybridzoom/rig_sim.hpp"

namespace hz {

inline constexpr int kConfigSchemaVersion = 1;

/// Every tunable of the pipeline. Defaults match the per-module defaults.
struct PipelineConfig {
  TranslationParams coarse;
  FlowParams flow;
  DefocusParams defocus;
  OcclusionParams occlusion;
  UncertaintyParams uncertainty;
  RejectionParams rejection;
  std::string fusion_operator = "band_inject";
  std::optional<double> boundary_sigma;  // unset: 1% of the crop short side
  int threads = 0;                       // 0: OpenMP default
  bool dump_images = true;
  bool dump_masks = true;
  bool dump_flow = true;
};

/// Throws ErrorKind::Config when any value is outside its module's bounds
/// or the fusion operator is unknown.
void validate_config(const PipelineConfig& cfg);

/// JSON text -> config. Requires "schema_version": 1; every other key is
/// optional, unknown keys are rejected. Errors are ErrorKind::Config.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

/// {"focal_ratio": r, "tele_fov_rect": {x,y,width,height}, "focus_roi": {...}}
/// Malformed JSON is an Io error, missing or mistyped fields Metadata.
CameraMeta parse_meta(const std::string& json_text);
CameraMeta load_meta(const std::filesystem::path& path);
std::string meta_to_json(const CameraMeta& meta);

/// Scene description for the simulator. Missing or invalid fields raise
/// ErrorKind::Config with the field path in the message.
RigScene parse_scene(const std::string& json_text);
RigScene load_scene(const std::filesystem::path& path);

}  // namespace hz
