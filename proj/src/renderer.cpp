#include "ember/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "ember/parallel.hpp"

namespace ember {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightFloor = 1e-4;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

Vec3 Camera::rotate(Vec3 d) const {
  const auto& m = world_from_camera;
  return {m[0] * d.x + m[1] * d.y + m[2] * d.z, m[4] * d.x + m[5] * d.y + m[6] * d.z,
          m[8] * d.x + m[9] * d.y + m[10] * d.z};
}

void Camera::validate(double tol) const {
  if (width < 1 || height < 1) throw InputError("camera: resolution must be positive");
  if (!(fx > 0) || !(fy > 0)) throw InputError("camera: fx and fy must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw InputError("camera: bad principal point");
  const auto& m = world_from_camera;
  for (double v : m)
    if (!std::isfinite(v)) throw InputError("camera: non-finite pose");
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double d = 0;
      for (int r = 0; r < 3; ++r) d += m[r * 4 + a] * m[r * 4 + b];
      if (std::abs(d - (a == b ? 1.0 : 0.0)) > tol)
        throw InputError("camera: rotation block is not orthonormal");
    }
  if (m[12] != 0 || m[13] != 0 || m[14] != 0 || m[15] != 1)
    throw InputError("camera: last pose row must be 0 0 0 1");
}

Ray generate_ray(const Camera& camera, int i, int j) {
  const Vec3 d{(i + 0.5 - camera.cx) / camera.fx, (j + 0.5 - camera.cy) / camera.fy, 1.0};
  return {camera.position(), normalize(camera.rotate(normalize(d)))};
}

GBuffer::GBuffer(int w, int h)
    : width(w),
      height(h),
      color(static_cast<std::size_t>(w) * h),
      depth(static_cast<std::size_t>(w) * h, std::numeric_limits<float>::infinity()),
      normal(static_cast<std::size_t>(w) * h, Vec3{0, 0, 1}),
      position(static_cast<std::size_t>(w) * h) {}

void GBuffer::derive_positions(const Camera& camera) {
  position.assign(pixel_count(), Vec3{});
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      const std::size_t px = static_cast<std::size_t>(j) * width + i;
      if (std::isfinite(depth[px])) position[px] = generate_ray(camera, i, j).at(depth[px]);
    }
}

void RenderParams::validate() const {
  auto fail = [](const char* msg) { throw InputError(std::string("render params: ") + msg); };
  if (!(sigma_a >= 0)) fail("sigma_a must be >= 0");
  if (!(Y_smoke > 0 && Y_smoke < 1)) fail("Y_smoke must lie in (0,1)");
  if (!(sigma_s_smoke >= 0)) fail("sigma_s_smoke must be >= 0");
  if (!(smoke_ambient >= 0)) fail("smoke_ambient must be >= 0");
  if (!(M_c_dark >= 0 && M_c_dark < 1)) fail("M_c_dark must lie in [0,1)");
  if (!(r_dark > 0 && r_dark <= 1)) fail("r_dark must lie in (0,1]");
  if (!(k_d >= 0) || !(k_s >= 0) || !(shininess >= 0)) fail("Phong coefficients must be >= 0");
  if (!(T_light > 0)) fail("T_light must be > 0");
  if (max_lights < 0) fail("max_lights must be >= 0");
  if (n_coarse < 1 || n_fine < 1) fail("sample counts must be >= 1");
  if (!(exposure > 0)) fail("exposure must be > 0");
  if (!(fire_gain >= 0)) fail("fire_gain must be >= 0");
  if (!(adaptation_min_T > 0)) fail("adaptation_min_T must be > 0");
}

bool intersect_box(const Ray& ray, Vec3 lo, Vec3 hi, double& t_near, double& t_far) {
  double t0 = -kInf, t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a], d = ray.dir[a];
    if (d == 0.0) {
      if (o < lo[a] || o > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o) / d, tb = (hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  t_near = t0;
  t_far = t1;
  return t1 >= t0;
}

RaySamples sample_interval(const Ray& ray, const ScalarField& Y, double t0, double t1,
                           int n_coarse, int n_fine, RaySamples* scratch) {
  RaySamples out;
  if (!(t1 > t0) || n_coarse < 1) return out;
  RaySamples local;
  RaySamples& work = scratch ? *scratch : local;

  const double width = (t1 - t0) / n_coarse;
  std::vector<double>& coarse = work.t;
  std::vector<double>& cdf = work.dt;
  coarse.resize(n_coarse);
  cdf.resize(static_cast<std::size_t>(n_coarse) + 1);
  cdf[0] = 0.0;
  for (int i = 0; i < n_coarse; ++i) {
    coarse[i] = t0 + (i + 0.5) * width;
    const double w = std::max(0.0f, sample_trilinear(Y, ray.at(coarse[i]))) + kWeightFloor;
    cdf[i + 1] = cdf[i] + w;
  }
  const double total = cdf[n_coarse];

  out.t.reserve(static_cast<std::size_t>(n_coarse) + n_fine);
  std::vector<double> fine;
  fine.reserve(n_fine);
  int bin = 0;
  for (int k = 0; k < n_fine; ++k) {
    const double target = (k + 0.5) / n_fine * total;
    while (bin < n_coarse - 1 && cdf[bin + 1] <= target) ++bin;
    const double frac = (target - cdf[bin]) / (cdf[bin + 1] - cdf[bin]);
    fine.push_back(t0 + (bin + std::clamp(frac, 0.0, 1.0)) * width);
  }
  out.t.resize(coarse.size() + fine.size());
  std::merge(coarse.begin(), coarse.end(), fine.begin(), fine.end(), out.t.begin());

  const std::size_t n = out.t.size();
  out.dt.resize(n);
  double prev = t0;
  for (std::size_t m = 0; m < n; ++m) {
    const double next = m + 1 < n ? 0.5 * (out.t[m] + out.t[m + 1]) : t1;
    out.dt[m] = next - prev;
    prev = next;
  }
  return out;
}

RaySamples sample_ray(const Ray& ray, const ScalarField& Y, double t_max,
                      const RenderParams& params) {
  const GridSpec& spec = Y.spec();
  double t0, t1;
  if (!intersect_box(ray, spec.lower_corner(), spec.upper_corner(), t0, t1)) return {};
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, t_max);
  return sample_interval(ray, Y, t0, t1, params.n_coarse, params.n_fine);
}

SmokeColors::SmokeColors(const GridSpec& spec, Rgb color)
    : spec_(spec), palette_index_(spec.cell_count(), 0), palette_{color} {}

SmokeColors::SmokeColors(const OccupancyGrid& occupancy, const MaterialTable& materials,
                         const CharState& solid, const SolidProperties& props)
    : spec_(occupancy.spec) {
  constexpr std::uint16_t kUnset = std::numeric_limits<std::uint16_t>::max();
  palette_.push_back({0.5, 0.5, 0.5});
  std::map<std::int32_t, std::uint16_t> slot;
  for (const auto& [id, m] : materials.entries()) {
    slot[static_cast<std::int32_t>(id)] = static_cast<std::uint16_t>(palette_.size());
    palette_.push_back(m.smoke_color);
  }

  palette_index_.assign(spec_.cell_count(), kUnset);
  std::deque<std::uint32_t> queue;
  auto seed = [&](bool burning_only) {
    for (std::uint32_t idx : props.solid_cells) {
      if (!occupancy.is_combustible(idx)) continue;
      if (burning_only && !(solid.T_m[idx] >= props.T_ign[idx])) continue;
      palette_index_[idx] = slot.at(occupancy.material[idx]);
      queue.push_back(idx);
    }
  };
  seed(true);
  if (queue.empty()) seed(false);
  if (queue.empty()) {
    std::fill(palette_index_.begin(), palette_index_.end(), 0);
    return;
  }
  while (!queue.empty()) {
    const std::uint32_t idx = queue.front();
    queue.pop_front();
    const Index3 c = spec_.unlinear(idx);
    for (const Index3& off : kFaceOffsets) {
      const Index3 nb = c + off;
      if (!spec_.contains(nb)) continue;
      const std::size_t nidx = spec_.linear(nb);
      if (palette_index_[nidx] != kUnset) continue;
      palette_index_[nidx] = palette_index_[idx];
      queue.push_back(static_cast<std::uint32_t>(nidx));
    }
  }
}

Rgb SmokeColors::at(Vec3 p) const {
  if (palette_.empty()) return {0.5, 0.5, 0.5};
  Index3 c = spec_.index_of(p);
  c.i = std::clamp(c.i, 0, spec_.nx() - 1);
  c.j = std::clamp(c.j, 0, spec_.ny() - 1);
  c.k = std::clamp(c.k, 0, spec_.nz() - 1);
  return palette_[palette_index_[spec_.linear(c)]];
}

FireSmokeResult integrate_fire_smoke(const Ray& ray, const RaySamples& samples,
                                     const ScalarField& Y, const ScalarField& T,
                                     const SmokeColors& smoke, const BlackbodyTable& emission,
                                     const RenderParams& params) {
  FireSmokeResult r;
  for (std::size_t m = 0; m < samples.t.size(); ++m) {
    const Vec3 p = ray.at(samples.t[m]);
    const TrilinearStencil s(Y.spec(), p);
    const double y = s.apply(Y.values());
    if (!(y > 0.0)) continue;
    const double step = samples.dt[m];
    if (y > params.Y_smoke) {
      const double a = 1.0 - std::exp(-params.sigma_a * step);
      if (a > 0.0) r.fire += emission(s.apply(T.values())) * (r.transmittance * a);
      r.transmittance *= 1.0 - a;
    } else {
      const double a = 1.0 - std::exp(-params.sigma_s_smoke * y * step);
      if (a > 0.0) {
        const Rgb c = smoke.at(p);
        const double w = params.smoke_ambient * r.transmittance * a;
        r.smoke += LinearRGB{c[0] * w, c[1] * w, c[2] * w};
      }
      r.transmittance *= 1.0 - a;
    }
  }
  return r;
}

const BlackbodyTable& default_blackbody_table() {
  static const BlackbodyTable table(SpectralTable::standard(), 200.0, 6000.0, 1.0);
  return table;
}

LinearRGB fire_to_linear(XYZ fire, const FrameContext& ctx, const RenderParams& params) {
  return xyz_to_linear(ctx.adapter(fire)) * params.fire_gain;
}

FrameContext prepare_frame(const RenderInputs& in, const RenderParams& params) {
  const GridSpec& spec = in.Y.spec();
  require(in.T.spec() == spec && in.occupancy.spec == spec && in.solid.M_c.spec() == spec,
          "prepare_frame: grid mismatch");
  FrameContext ctx;

  double t_max = in.T_air + 1.0;
  std::array<int, 3> lo{spec.nx(), spec.ny(), spec.nz()}, hi{-1, -1, -1};
  for (std::size_t idx = 0; idx < spec.cell_count(); ++idx) {
    if (!in.occupancy.is_air(idx)) continue;
    t_max = std::max(t_max, static_cast<double>(in.T[idx]));
    if (in.Y[idx] > 0.0f) {
      const Index3 c = spec.unlinear(idx);
      lo = {std::min(lo[0], c.i), std::min(lo[1], c.j), std::min(lo[2], c.k)};
      hi = {std::max(hi[0], c.i), std::max(hi[1], c.j), std::max(hi[2], c.k)};
    }
  }
  ctx.T_max_scene = t_max;
  ctx.adapter = ChromaticAdapter(std::max(t_max, params.adaptation_min_T),
                                 SpectralTable::standard());

  if (hi[0] >= 0) {
    // Trilinear support of the nonzero cells; clamped sampling extends the
    // outermost layer to the domain faces.
    ctx.has_volume = true;
    const Vec3 dlo = spec.lower_corner(), dhi = spec.upper_corner();
    for (int a = 0; a < 3; ++a) {
      const double h = spec.spacing();
      ctx.volume_lo[a] = lo[a] == 0 ? dlo[a] : dlo[a] + (lo[a] - 0.5) * h;
      ctx.volume_hi[a] = hi[a] == spec.dim(a) - 1 ? dhi[a] : dlo[a] + (hi[a] + 1.5) * h;
    }
    ctx.smoke = SmokeColors(in.occupancy, in.materials, in.solid, in.props);
  }

  struct Hot {
    std::size_t idx;
    XYZ e;
  };
  std::vector<Hot> hot;
  const BlackbodyTable& bb = default_blackbody_table();
  for (std::size_t idx = 0; idx < spec.cell_count(); ++idx)
    if (in.occupancy.is_air(idx) && in.T[idx] >= params.T_light) hot.push_back({idx, bb(in.T[idx])});
  ctx.hot_voxels = hot.size();
  std::stable_sort(hot.begin(), hot.end(), [](const Hot& a, const Hot& b) { return a.e.Y > b.e.Y; });

  const std::size_t take = std::min<std::size_t>(hot.size(), static_cast<std::size_t>(params.max_lights));
  const double weight = take > 0 ? static_cast<double>(hot.size()) / take : 0.0;
  for (std::size_t m = 0; m < take; ++m) {
    const auto pick = static_cast<std::size_t>((m + 0.5) * hot.size() / take);
    const Hot& h = hot[std::min(pick, hot.size() - 1)];
    ctx.lights.push_back({spec.center_of(spec.unlinear(h.idx)),
                          fire_to_linear(h.e, ctx, params) * weight});
  }
  return ctx;
}

double char_dim_factor(double M_c, const RenderParams& params) {
  // Char mass is stored in single precision; compare the onset there too.
  if (!(static_cast<float>(M_c) > static_cast<float>(params.M_c_dark))) return 1.0;
  const double f = (std::min(M_c, 1.0) - params.M_c_dark) / (1.0 - params.M_c_dark);
  // Written so both endpoints come out exact: 1 at onset, r_dark at f = 1.
  return params.r_dark + (1.0 - params.r_dark) * (1.0 - f);
}

LinearRGB shade_background(const GBuffer& gbuffer, std::size_t pixel, Vec3 view_origin,
                           const ScalarField& M_c, const OccupancyGrid& occupancy,
                           const FrameContext& ctx, const RenderParams& params) {
  const LinearRGB base = gbuffer.color[pixel];
  if (!std::isfinite(gbuffer.depth[pixel])) return base;
  const Vec3 p = gbuffer.position[pixel];
  const Vec3 n = gbuffer.normal[pixel];
  const double h = M_c.spec().spacing();

  // Surface points sit on voxel faces; look half a cell inside the surface.
  const double mc = char_at(p - n * (0.5 * h), M_c, occupancy);
  LinearRGB out = base * char_dim_factor(mc, params);
  if (ctx.lights.empty()) return out;

  const Vec3 v = normalize(view_origin - p);
  const double volume = h * h * h;
  LinearRGB phong;
  for (const Light& light : ctx.lights) {
    const Vec3 to_light = light.position - p;
    const double d2 = dot(to_light, to_light);
    const Vec3 l = to_light / std::sqrt(d2);
    const double ndotl = std::max(0.0, dot(n, l));
    const Vec3 r = n * (2.0 * dot(n, l)) - l;
    const double rdotv = std::max(0.0, dot(r, v));
    double w = params.k_d * ndotl;
    if (params.k_s > 0.0 && rdotv > 0.0) w += params.k_s * std::pow(rdotv, params.shininess);
    // Distances below one cell are clamped to keep the sum bounded.
    if (params.phong_falloff) w *= volume / std::max(d2, h * h);
    phong += light.radiance * w;
  }
  return out + phong;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

FrameBuffers render_frame(const Camera& camera, const RenderInputs& in, const GBuffer& gbuffer,
                          const RenderParams& params) {
  if (gbuffer.width != camera.width || gbuffer.height != camera.height)
    throw InputError("render: gbuffer is " + std::to_string(gbuffer.width) + "x" +
                     std::to_string(gbuffer.height) + " but camera is " +
                     std::to_string(camera.width) + "x" + std::to_string(camera.height));
  const FrameContext ctx = prepare_frame(in, params);
  const BlackbodyTable& bb = default_blackbody_table();
  const int W = camera.width, H = camera.height;
  const std::size_t count = static_cast<std::size_t>(W) * H;

  FrameBuffers fb;
  fb.width = W;
  fb.height = H;
  fb.linear.resize(count);
  fb.volume.assign(count, LinearRGB{});
  fb.transmittance.assign(count, 1.0f);

  auto start = std::chrono::steady_clock::now();
  if (ctx.has_volume) {
    parallel_for(static_cast<std::size_t>(H), [&](std::size_t jb, std::size_t je) {
      RaySamples scratch;
      for (std::size_t j = jb; j < je; ++j)
        for (int i = 0; i < W; ++i) {
          const std::size_t px = j * W + i;
          const Ray ray = generate_ray(camera, i, static_cast<int>(j));
          double t0, t1;
          if (!intersect_box(ray, ctx.volume_lo, ctx.volume_hi, t0, t1)) continue;
          t0 = std::max(t0, 0.0);
          t1 = std::min(t1, static_cast<double>(gbuffer.depth[px]));
          if (!(t1 > t0)) continue;
          const RaySamples s =
              sample_interval(ray, in.Y, t0, t1, params.n_coarse, params.n_fine, &scratch);
          const FireSmokeResult r = integrate_fire_smoke(ray, s, in.Y, in.T, ctx.smoke, bb, params);
          fb.volume[px] = fire_to_linear(r.fire, ctx, params) + r.smoke;
          fb.transmittance[px] = static_cast<float>(r.transmittance);
        }
    });
  }
  fb.timings.fire_smoke_ms = elapsed_ms(start);

  start = std::chrono::steady_clock::now();
  fb.image.width = W;
  fb.image.height = H;
  fb.image.rgb.resize(count * 3);
  const Vec3 eye = camera.position();
  parallel_for(count, [&](std::size_t b, std::size_t e) {
    for (std::size_t px = b; px < e; ++px) {
      const LinearRGB bg =
          shade_background(gbuffer, px, eye, in.solid.M_c, in.occupancy, ctx, params);
      const LinearRGB L = fb.volume[px] + bg * static_cast<double>(fb.transmittance[px]);
      fb.linear[px] = L;
      const DisplayRGB d = tonemap(L, params.exposure);
      fb.image.rgb[px * 3 + 0] = quantize(d.r);
      fb.image.rgb[px * 3 + 1] = quantize(d.g);
      fb.image.rgb[px * 3 + 2] = quantize(d.b);
    }
  });
  fb.timings.gs_ms = elapsed_ms(start);
  return fb;
}

}  // namespace ember
