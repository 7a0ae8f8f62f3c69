#include "hybridzoom/dense_flow.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace hz {

std::pair<int, int> flow_resolution(int image_w, int image_h,
                                    const FlowParams& params) {
  const int long_cfg = std::max(params.flow_width, params.flow_height);
  const int long_img = std::max(image_w, image_h);
  if (long_img <= long_cfg) return {image_w, image_h};
  const double s = static_cast<double>(long_cfg) / long_img;
  const int fw = std::clamp(static_cast<int>(std::lround(image_w * s)), 1, image_w);
  const int fh = std::clamp(static_cast<int>(std::lround(image_h * s)), 1, image_h);
  return {fw, fh};
}

namespace {

constexpr int kSweepsPerWarp = 10;
constexpr float kGradFloor = 1e-4f;  // squared, for data-term normalization
constexpr double kTensorSigma = 1.0;

// Central differences with edge clamp.
void gradients(const PlanarImage& img, std::vector<float>& gx,
               std::vector<float>& gy) {
  const int w = img.width(), h = img.height();
  gx.assign(img.plane_size(), 0.0f);
  gy.assign(img.plane_size(), 0.0f);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = 0.5f * (img.at(xp, y) - img.at(xm, y));
      gy[i] = 0.5f * (img.at(x, yp) - img.at(x, ym));
    }
  }
}

// Compare-exchange pairs that leave element 12 of 25 inputs in its sorted
// position: Batcher's odd-even merge network for 32 wires, with the wires
// >= 25 treated as +inf (never touched) and comparators not feeding
// position 12 pruned.
std::vector<std::pair<int, int>> median25_network() {
  std::vector<std::pair<int, int>> net;
  constexpr int n = 32;
  for (int p = 1; p < n; p <<= 1)
    for (int k = p; k >= 1; k >>= 1)
      for (int j = k % p; j + k < n; j += 2 * k)
        for (int i = 0; i < std::min(k, n - j - k); ++i)
          if ((i + j) / (2 * p) == (i + j + k) / (2 * p)) {
            const int a = i + j, b = i + j + k;
            if (b < 25) net.emplace_back(a, b);
          }
  std::vector<bool> needed(25, false);
  needed[12] = true;
  std::vector<std::pair<int, int>> kept;
  for (auto it = net.rbegin(); it != net.rend(); ++it) {
    if (!needed[it->first] && !needed[it->second]) continue;
    needed[it->first] = needed[it->second] = true;
    kept.push_back(*it);
  }
  std::reverse(kept.begin(), kept.end());
  return kept;
}

void median5x5(std::vector<float>& plane, int w, int h) {
  static const std::vector<std::pair<int, int>> net = median25_network();
  constexpr int kLanes = 8;
  std::vector<float> out(plane.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const float* rows[5];
    for (int dy = -2; dy <= 2; ++dy)
      rows[dy + 2] = plane.data() + static_cast<std::size_t>(std::clamp(y + dy, 0, h - 1)) * w;
    float win[25][kLanes];
    for (int x0 = 0; x0 < w; x0 += kLanes) {
      const int lanes = std::min(kLanes, w - x0);
      for (int l = 0; l < kLanes; ++l) {
        const int x = x0 + std::min(l, lanes - 1);
        int k = 0;
        for (int dy = 0; dy < 5; ++dy)
          for (int dx = -2; dx <= 2; ++dx)
            win[k++][l] = rows[dy][std::clamp(x + dx, 0, w - 1)];
      }
      for (const auto& [a, b] : net)
        for (int l = 0; l < kLanes; ++l) {
          const float lo = std::min(win[a][l], win[b][l]);
          const float hi = std::max(win[a][l], win[b][l]);
          win[a][l] = lo;
          win[b][l] = hi;
        }
      for (int l = 0; l < lanes; ++l)
        out[static_cast<std::size_t>(y) * w + x0 + l] = win[12][l];
    }
  }
  plane.swap(out);
}

void clamp_magnitude(FlowField& f, double limit) {
  const float lim2 = static_cast<float>(limit * limit);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    const float m2 = f.u[i] * f.u[i] + f.v[i] * f.v[i];
    if (m2 > lim2) {
      const float s = static_cast<float>(limit) / std::sqrt(m2);
      f.u[i] *= s;
      f.v[i] *= s;
    }
  }
}

PlanarImage wrap_plane(std::vector<float> data, int w, int h) {
  PlanarImage img(w, h, 1);
  img.data() = std::move(data);
  return img;
}

// One warping step at a single pyramid level: linearize around the current
// flow and run Jacobi sweeps on the increment.
void refine_level(const PlanarImage& src, const PlanarImage& ref,
                  FlowField& flow, int sweeps, float alpha) {
  const int w = src.width(), h = src.height();
  const std::size_t n = src.plane_size();
  auto [ref_w, valid] = bilinear_warp(ref, flow);

  PlanarImage avg(w, h, 1);
  for (std::size_t i = 0; i < n; ++i)
    avg.data()[i] = 0.5f * (ref_w.data()[i] + src.data()[i]);
  std::vector<float> ix, iy;
  gradients(avg, ix, iy);

  // Normalized motion tensor components.
  std::vector<float> j11(n), j12(n), j22(n), j13(n), j23(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (valid.data()[i] == 0.0f) {
      j11[i] = j12[i] = j22[i] = j13[i] = j23[i] = 0.0f;
      continue;
    }
    const float it = ref_w.data()[i] - src.data()[i];
    const float norm = 1.0f / (ix[i] * ix[i] + iy[i] * iy[i] + kGradFloor);
    j11[i] = ix[i] * ix[i] * norm;
    j12[i] = ix[i] * iy[i] * norm;
    j22[i] = iy[i] * iy[i] * norm;
    j13[i] = ix[i] * it * norm;
    j23[i] = iy[i] * it * norm;
  }
  auto integrate = [&](std::vector<float>& p) {
    p = std::move(gaussian_blur(wrap_plane(std::move(p), w, h), kTensorSigma)
                      .data());
  };
  integrate(j11);
  integrate(j12);
  integrate(j22);
  integrate(j13);
  integrate(j23);

  // Per pixel: neighbour count, the fixed part of the smoothness term
  // (sum of u0 over neighbours minus nb * u0) and the reciprocal diagonals.
  std::vector<float> base_u(n), base_v(n), inv_u(n), inv_v(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      float su = 0.0f, sv = 0.0f;
      int nb = 0;
      auto add = [&](std::size_t q) {
        su += flow.u[q] - flow.u[i];
        sv += flow.v[q] - flow.v[i];
        ++nb;
      };
      if (x > 0) add(i - 1);
      if (x + 1 < w) add(i + 1);
      if (y > 0) add(i - w);
      if (y + 1 < h) add(i + w);
      base_u[i] = alpha * su - j13[i];
      base_v[i] = alpha * sv - j23[i];
      inv_u[i] = 1.0f / (alpha * nb + j11[i]);
      inv_v[i] = 1.0f / (alpha * nb + j22[i]);
    }

  std::vector<float> du(n, 0.0f), dv(n, 0.0f), du_next(n), dv_next(n);
  for (int s = 0; s < sweeps; ++s) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      const std::size_t r = static_cast<std::size_t>(y) * w;
      const std::size_t up = y > 0 ? r - w : r;
      const std::size_t dn = y + 1 < h ? r + w : r;
      const bool has_up = y > 0, has_dn = y + 1 < h;
      for (int x = 0; x < w; ++x) {
        const std::size_t i = r + x;
        float nu = 0.0f, nv = 0.0f;
        if (x > 0) { nu += du[i - 1]; nv += dv[i - 1]; }
        if (x + 1 < w) { nu += du[i + 1]; nv += dv[i + 1]; }
        if (has_up) { nu += du[up + x]; nv += dv[up + x]; }
        if (has_dn) { nu += du[dn + x]; nv += dv[dn + x]; }
        du_next[i] = (alpha * nu + base_u[i] - j12[i] * dv[i]) * inv_u[i];
        dv_next[i] = (alpha * nv + base_v[i] - j12[i] * du[i]) * inv_v[i];
      }
    }
    du.swap(du_next);
    dv.swap(dv_next);
  }
  for (std::size_t i = 0; i < n; ++i) {
    flow.u[i] += du[i];
    flow.v[i] += dv[i];
  }
  median5x5(flow.u, w, h);
  median5x5(flow.v, w, h);
}

std::vector<float> box_mean7(const std::vector<float>& p, int w, int h) {
  constexpr int r = 3;
  std::vector<float> tmp(p.size()), out(p.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int k = -r; k <= r; ++k)
        acc += p[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc / (2 * r + 1);
    }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int k = -r; k <= r; ++k)
        acc += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc / (2 * r + 1);
    }
  return out;
}

}  // namespace

FlowField estimate_flow(const PlanarImage& src, const PlanarImage& ref,
                        const FlowParams& params, Translation2D init) {
  require(src.channels() == 1 && ref.channels() == 1, ErrorKind::InvalidInput,
          "estimate_flow expects single-channel images");
  require(src.same_size(ref), ErrorKind::DimensionMismatch,
          "estimate_flow: image sizes differ");
  require(params.pyramid_levels >= 1 && params.iterations_per_level >= 1,
          ErrorKind::InvalidInput, "invalid flow parameters");

  const auto src_pyr = build_pyramid(src, params.pyramid_levels, params.scale_factor);
  const auto ref_pyr = build_pyramid(ref, params.pyramid_levels, params.scale_factor);
  const int top = static_cast<int>(src_pyr.size()) - 1;
  const float alpha = static_cast<float>(params.smoothness_weight);

  const double top_scale = static_cast<double>(src_pyr[top].width()) / src.width();
  FlowField flow(src_pyr[top].width(), src_pyr[top].height(),
                 static_cast<float>(init.dx * top_scale),
                 static_cast<float>(init.dy * top_scale));

  for (int level = top; level >= 0; --level) {
    const PlanarImage& s = src_pyr[level];
    const PlanarImage& r = ref_pyr[level];
    if (flow.width != s.width() || flow.height != s.height())
      flow = resize_flow(flow, s.width(), s.height());
    const double level_scale = static_cast<double>(s.width()) / src.width();
    int remaining = params.iterations_per_level;
    while (remaining > 0) {
      const int sweeps = std::min(remaining, kSweepsPerWarp);
      refine_level(s, r, flow, sweeps, alpha);
      clamp_magnitude(flow, params.max_displacement * level_scale);
      remaining -= sweeps;
    }
  }

  LogVariance lv = estimate_uncertainty(src, ref, flow);
  flow.logvar_x = std::move(lv.x);
  flow.logvar_y = std::move(lv.y);
  return flow;
}

LogVariance estimate_uncertainty(const PlanarImage& src, const PlanarImage& ref,
                                 const FlowField& flow) {
  require(src.channels() == 1 && ref.channels() == 1, ErrorKind::InvalidInput,
          "estimate_uncertainty expects single-channel images");
  require(src.same_size(ref) && src.width() == flow.width &&
              src.height() == flow.height,
          ErrorKind::DimensionMismatch, "estimate_uncertainty: size mismatch");
  const int w = src.width(), h = src.height();
  const std::size_t n = src.plane_size();
  auto ref_w = bilinear_warp(ref, flow).first;
  std::vector<float> gx, gy;
  gradients(ref_w, gx, gy);
  std::vector<float> r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float r = src.data()[i] - ref_w.data()[i];
    r2[i] = r * r;
    gx[i] *= gx[i];
    gy[i] *= gy[i];
  }
  const auto mr = box_mean7(r2, w, h);
  const auto mgx = box_mean7(gx, w, h);
  const auto mgy = box_mean7(gy, w, h);

  constexpr double kEps = 1e-6;
  LogVariance out{std::vector<float>(n), std::vector<float>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(mr[i] / (mgx[i] + kEps) + kEps);
    const double ly = std::log(mr[i] / (mgy[i] + kEps) + kEps);
    out.x[i] = std::clamp(static_cast<float>(lx), kLogVarMin, kLogVarMax);
    out.y[i] = std::clamp(static_cast<float>(ly), kLogVarMin, kLogVarMax);
  }
  return out;
}

std::pair<FlowField, FlowField> estimate_flow_pair(const PlanarImage& src,
                                                   const PlanarImage& ref,
                                                   const FlowParams& params,
                                                   Translation2D init) {
  FlowField fwd = estimate_flow(src, ref, params, init);
  FlowField bwd = estimate_flow(ref, src, params, {-init.dx, -init.dy});
  return {std::move(fwd), std::move(bwd)};
}

// ---------------------------------------------------------------------------
// .flo I/O

namespace {

static_assert(std::endian::native == std::endian::little,
              ".flo I/O assumes a little-endian host");

void write_interleaved(const std::filesystem::path& path, int w, int h,
                       const std::vector<float>& a, const std::vector<float>& b) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const float tag = kFloTag;
  const std::int32_t dims[2] = {w, h};
  os.write(reinterpret_cast<const char*>(&tag), sizeof tag);
  os.write(reinterpret_cast<const char*>(dims), sizeof dims);
  std::vector<float> buf(a.size() * 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    buf[2 * i] = a[i];
    buf[2 * i + 1] = b[i];
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

void read_interleaved(const std::filesystem::path& path, int& w, int& h,
                      std::vector<float>& a, std::vector<float>& b) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
  float tag = 0.0f;
  std::int32_t dims[2] = {0, 0};
  is.read(reinterpret_cast<char*>(&tag), sizeof tag);
  is.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!is || tag != kFloTag)
    throw Error(ErrorKind::Io, "bad .flo header: " + path.string());
  if (dims[0] <= 0 || dims[1] <= 0 || dims[0] > (1 << 16) || dims[1] > (1 << 16))
    throw Error(ErrorKind::Io, "bad .flo dimensions: " + path.string());
  w = dims[0];
  h = dims[1];
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> buf(2 * n);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw Error(ErrorKind::Io, "truncated .flo: " + path.string());
  a.resize(n);
  b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = buf[2 * i];
    b[i] = buf[2 * i + 1];
  }
}

}  // namespace

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
  write_interleaved(path, flow.width, flow.height, flow.u, flow.v);
}

void write_logvar(const std::filesystem::path& path, const FlowField& flow) {
  write_interleaved(path, flow.width, flow.height, flow.logvar_x, flow.logvar_y);
}

FlowField read_flo(const std::filesystem::path& path) {
  int w = 0, h = 0;
  std::vector<float> u, v;
  read_interleaved(path, w, h, u, v);
  FlowField f(w, h);
  f.u = std::move(u);
  f.v = std::move(v);
  return f;
}

void read_logvar(const std::filesystem::path& path, FlowField& flow) {
  int w = 0, h = 0;
  std::vector<float> a, b;
  read_interleaved(path, w, h, a, b);
  if (w != flow.width || h != flow.height)
    throw Error(ErrorKind::DimensionMismatch, "logvar sidecar size mismatch");
  flow.logvar_x = std::move(a);
  flow.logvar_y = std::move(b);
}

}  // namespace hz
