#include "hybridzoom/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hybridzoom/fusion.hpp"
#include "json.hpp"

namespace hz {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, ErrorKind kind) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(kind, std::string("malformed JSON: ") + e.what());
  }
}

// Walks one JSON object, rejecting keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, ErrorKind kind)
      : j_(j), path_(std::move(path)), kind_(kind) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_[key].is_null()) return;
    out = get<T>(key);
  }

  template <typename T>
  T required(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(name(key), "missing field");
    return get<T>(key);
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    return ObjectReader(j_.contains(key) ? j_[key] : empty(), name(key), kind_);
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(name(key), "missing field");
    return j_[key];
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(name(it.key().c_str()), "unknown key");
  }

  std::string name(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw Error(kind_, why + ": " + field);
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  template <typename T>
  T get(const char* key) {
    try {
      return j_[key].get<T>();
    } catch (const json::exception&) {
      fail(name(key), "wrong type");
    }
  }

  const json& j_;
  std::string path_;
  ErrorKind kind_;
  std::set<std::string> seen_;
};

Rect read_rect(ObjectReader r) {
  Rect out;
  out.x = r.required<int>("x");
  out.y = r.required<int>("y");
  out.width = r.required<int>("width");
  out.height = r.required<int>("height");
  r.finish();
  return out;
}

json rect_json(const Rect& r) {
  return {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::Config, std::string("config value out of range: ") + what);
}

}  // namespace

void validate_config(const PipelineConfig& c) {
  check(c.coarse.fast_threshold > 0.0 && c.coarse.fast_threshold < 1.0,
        "coarse.fast_threshold");
  check(c.coarse.patch_size >= 3 && c.coarse.patch_size % 2 == 1,
        "coarse.patch_size");
  check(c.coarse.search_radius >= 0.0, "coarse.search_radius");
  check(c.coarse.min_matches >= 1, "coarse.min_matches");
  check(c.coarse.min_ncc > -1.0 && c.coarse.min_ncc <= 1.0, "coarse.min_ncc");
  check(c.coarse.max_keypoints >= 16, "coarse.max_keypoints");
  check(c.flow.flow_width >= 8 && c.flow.flow_height >= 8, "flow.flow_width/flow_height");
  check(c.flow.pyramid_levels >= 1 && c.flow.pyramid_levels <= 12, "flow.pyramid_levels");
  check(c.flow.scale_factor > 0.0 && c.flow.scale_factor < 1.0, "flow.scale_factor");
  check(c.flow.iterations_per_level >= 1, "flow.iterations_per_level");
  check(c.flow.smoothness_weight > 0.0, "flow.smoothness_weight");
  check(c.flow.max_displacement > 0.0, "flow.max_displacement");
  check(c.defocus.gamma >= 0.0, "defocus.gamma");
  check(c.defocus.sigma_f > 0.0, "defocus.sigma_f");
  check(c.defocus.k_clusters >= 1, "defocus.k_clusters");
  check(c.defocus.kmeans_iters >= 0, "defocus.kmeans_iters");
  check(c.occlusion.s > 0.0, "occlusion.s");
  check(c.uncertainty.s_max > 0.0, "uncertainty.s_max");
  check(c.rejection.patch >= 1, "rejection.patch");
  check(c.rejection.stride >= 1 && c.rejection.stride <= c.rejection.patch,
        "rejection.stride");
  check(c.rejection.epsilon0 > 0.0, "rejection.epsilon0");
  check(!c.boundary_sigma || *c.boundary_sigma >= 0.0, "blend.boundary_sigma");
  check(c.threads >= 0 && c.threads <= 1024, "threads");
  fusion_operator(c.fusion_operator);  // throws Config on unknown keys
}

PipelineConfig parse_config(const std::string& text) {
  const json j = parse_json(text, ErrorKind::Config);
  ObjectReader root(j, "", ErrorKind::Config);
  const int version = root.required<int>("schema_version");
  if (version != kConfigSchemaVersion)
    throw Error(ErrorKind::Config,
                "unsupported schema_version " + std::to_string(version));

  PipelineConfig c;
  root.optional("threads", c.threads);
  {
    auto r = root.child("coarse");
    r.optional("fast_threshold", c.coarse.fast_threshold);
    r.optional("patch_size", c.coarse.patch_size);
    r.optional("search_radius", c.coarse.search_radius);
    r.optional("min_matches", c.coarse.min_matches);
    r.optional("min_ncc", c.coarse.min_ncc);
    r.optional("max_keypoints", c.coarse.max_keypoints);
    r.finish();
  }
  {
    auto r = root.child("flow");
    r.optional("flow_width", c.flow.flow_width);
    r.optional("flow_height", c.flow.flow_height);
    r.optional("pyramid_levels", c.flow.pyramid_levels);
    r.optional("scale_factor", c.flow.scale_factor);
    r.optional("iterations_per_level", c.flow.iterations_per_level);
    r.optional("smoothness_weight", c.flow.smoothness_weight);
    r.optional("max_displacement", c.flow.max_displacement);
    r.finish();
  }
  {
    auto r = root.child("defocus");
    r.optional("gamma", c.defocus.gamma);
    r.optional("sigma_f", c.defocus.sigma_f);
    r.optional("k_clusters", c.defocus.k_clusters);
    r.optional("kmeans_iters", c.defocus.kmeans_iters);
    r.optional("seed", c.defocus.seed);
    r.finish();
  }
  {
    auto r = root.child("occlusion");
    r.optional("s", c.occlusion.s);
    r.finish();
  }
  {
    auto r = root.child("uncertainty");
    r.optional("s_max", c.uncertainty.s_max);
    r.finish();
  }
  {
    auto r = root.child("rejection");
    r.optional("patch", c.rejection.patch);
    r.optional("stride", c.rejection.stride);
    r.optional("epsilon0", c.rejection.epsilon0);
    r.finish();
  }
  {
    auto r = root.child("fusion");
    r.optional("operator", c.fusion_operator);
    r.finish();
  }
  {
    auto r = root.child("blend");
    double sigma = 0.0;
    if (r.has("boundary_sigma") && !r.raw("boundary_sigma").is_null()) {
      r.optional("boundary_sigma", sigma);
      c.boundary_sigma = sigma;
    } else {
      r.optional("boundary_sigma", sigma);
    }
    r.finish();
  }
  {
    auto r = root.child("dump");
    r.optional("images", c.dump_images);
    r.optional("masks", c.dump_masks);
    r.optional("flow", c.dump_flow);
    r.finish();
  }
  root.finish();
  validate_config(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  return parse_config(text);
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["threads"] = c.threads;
  j["coarse"] = {{"fast_threshold", c.coarse.fast_threshold},
                 {"patch_size", c.coarse.patch_size},
                 {"search_radius", c.coarse.search_radius},
                 {"min_matches", c.coarse.min_matches},
                 {"min_ncc", c.coarse.min_ncc},
                 {"max_keypoints", c.coarse.max_keypoints}};
  j["flow"] = {{"flow_width", c.flow.flow_width},
               {"flow_height", c.flow.flow_height},
               {"pyramid_levels", c.flow.pyramid_levels},
               {"scale_factor", c.flow.scale_factor},
               {"iterations_per_level", c.flow.iterations_per_level},
               {"smoothness_weight", c.flow.smoothness_weight},
               {"max_displacement", c.flow.max_displacement}};
  j["defocus"] = {{"gamma", c.defocus.gamma},
                  {"sigma_f", c.defocus.sigma_f},
                  {"k_clusters", c.defocus.k_clusters},
                  {"kmeans_iters", c.defocus.kmeans_iters},
                  {"seed", c.defocus.seed}};
  j["occlusion"] = {{"s", c.occlusion.s}};
  j["uncertainty"] = {{"s_max", c.uncertainty.s_max}};
  j["rejection"] = {{"patch", c.rejection.patch},
                    {"stride", c.rejection.stride},
                    {"epsilon0", c.rejection.epsilon0}};
  j["fusion"] = {{"operator", c.fusion_operator}};
  j["blend"] = {{"boundary_sigma",
                 c.boundary_sigma ? json(*c.boundary_sigma) : json(nullptr)}};
  j["dump"] = {{"images", c.dump_images},
               {"masks", c.dump_masks},
               {"flow", c.dump_flow}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------

CameraMeta parse_meta(const std::string& text) {
  const json j = parse_json(text, ErrorKind::Io);
  ObjectReader root(j, "", ErrorKind::Metadata);
  CameraMeta m;
  m.focal_ratio = root.required<double>("focal_ratio");
  m.tele_fov_rect = read_rect(root.child("tele_fov_rect"));
  if (root.has("focus_roi")) m.focus_roi = read_rect(root.child("focus_roi"));
  root.finish();
  return m;
}

CameraMeta load_meta(const std::filesystem::path& path) {
  return parse_meta(read_text(path));
}

std::string meta_to_json(const CameraMeta& m) {
  json j;
  j["focal_ratio"] = m.focal_ratio;
  j["tele_fov_rect"] = rect_json(m.tele_fov_rect);
  j["focus_roi"] = rect_json(m.focus_roi);
  return j.dump(2);
}

// ---------------------------------------------------------------------------

RigScene parse_scene(const std::string& text) {
  const json j = parse_json(text, ErrorKind::Config);
  ObjectReader root(j, "", ErrorKind::Config);
  RigScene s;
  s.seed = root.required<std::uint64_t>("seed");
  s.tele_width = root.required<int>("tele_width");
  s.tele_height = root.required<int>("tele_height");
  s.wide_width = root.required<int>("wide_width");
  s.wide_height = root.required<int>("wide_height");
  s.focal_ratio = root.required<double>("focal_ratio");
  root.optional("noise_sigma", s.noise_sigma);
  root.optional("focus_layer", s.focus_layer);
  std::array<double, 3> gain = s.color_gain;
  root.optional("color_gain", gain);
  s.color_gain = gain;
  std::array<double, 2> t = {0.0, 0.0};
  root.optional("translation", t);
  s.translation = {t[0], t[1]};

  const json& layers = root.raw("layers");
  if (!layers.is_array()) root.fail("layers", "expected an array");
  s.layers.clear();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    ObjectReader r(layers[i], "layers[" + std::to_string(i) + "]", ErrorKind::Config);
    SceneLayer L;
    const auto shape = r.required<std::string>("shape");
    if (shape == "full") {
      L.shape = LayerShape::Full;
    } else if (shape == "rect" || shape == "ellipse") {
      L.shape = shape == "rect" ? LayerShape::Rect : LayerShape::Ellipse;
      L.x = r.required<double>("x");
      L.y = r.required<double>("y");
      L.width = r.required<double>("width");
      L.height = r.required<double>("height");
    } else {
      r.fail(r.name("shape"), "unknown shape '" + shape + "'");
    }
    const auto d = r.required<std::array<double, 2>>("disparity");
    L.disparity_x = d[0];
    L.disparity_y = d[1];
    r.optional("defocus_sigma", L.defocus_sigma);
    r.optional("tint", L.tint);
    r.optional("contrast", L.contrast);
    r.finish();
    s.layers.push_back(L);
  }
  root.finish();
  try {
    validate_scene(s);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  return s;
}

RigScene load_scene(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  return parse_scene(text);
}

}  // namespace hz
