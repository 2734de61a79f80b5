// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "ember/demo.hpp"
#include "ember/pipeline.hpp"
#include "support.hpp"

#ifndef EMBER_BIN
#error "EMBER_BIN must name the ember executable"
#endif

using namespace ember;
using testing::count_positive;
using testing::y_centroid;

namespace {

constexpr double kPi = 3.14159265358979323846;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ember_acc_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

MaterialTable one_material(double beta, bool burnable) {
  MaterialTable t;
  Material m;
  m.name = burnable ? "wood" : "stone";
  m.burnable = burnable;
  m.beta = beta;
  t.add(1, m);
  return t;
}

// ---- 1 ---------------------------------------------------------------------

Outcome projection_residual() {
  const int n = 64;
  const GridSpec s(n, n, n, {}, 1.0 / n);
  const OccupancyGrid occ(s);
  // Sum of random low-wavenumber Fourier modes per component.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2 * kPi);
  std::uniform_int_distribution<int> wave(1, 3);
  VectorField u(s);
  for (ScalarField* c : {&u.x, &u.y, &u.z})
    for (int m = 0; m < 6; ++m) {
      const double a = amp(rng), ph = phase(rng);
      const int kx = wave(rng), ky = wave(rng), kz = wave(rng);
      for (std::size_t idx = 0; idx < c->size(); ++idx) {
        const Vec3 x = s.center_of(s.unlinear(idx));
        (*c)[idx] += static_cast<float>(a * std::sin(2 * kPi * (kx * x.x + ky * x.y + kz * x.z) + ph));
      }
    }
  const double umax = u.max_magnitude(), h = s.spacing();
  SimParams p;
  p.projection_iters = 200;
  p.projection_tol = 1e-7;
  ScalarField pressure(s);
  const auto start = Clock::now();
  const ProjectionReport r = project(u, pressure, occ, p);
  const double secs = seconds_since(start);
  const double div = max_divergence(u, occ), bound = 1e-4 * umax / h;
  return {div <= bound && r.iterations <= 200 && secs < 5.0,
          fmt("max div %.3g <= %.3g after %d sweeps, %.2f s", div, bound, r.iterations, secs)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome heat_kernel() {
  const int n = 64;
  const GridSpec s(n, n, n, {}, 1.0 / n);
  const double beta = 1e-3, h = s.spacing();
  OccupancyGrid occ(s);
  for (std::size_t idx = 0; idx < s.cell_count(); ++idx) occ.set_solid(s.unlinear(idx), 1, false);
  CharParams cp;
  cp.gamma_m = 0.0;
  const SolidProperties props = resolve_solid_properties(occ, one_material(beta, false), cp);
  CharState st(s, cp.T_amb);
  const double A = 1e7;
  const Index3 c{n / 2, n / 2, n / 2};
  st.T_m.at(c) += static_cast<float>(A);

  // sigma = sqrt(2 beta t) = 10 cells.
  const double t = 100.0 * h * h / (2.0 * beta);
  const int frames = 30;
  for (int f = 0; f < frames; ++f) heat_step(st, props, cp, t / frames);

  const Vec3 c0 = s.center_of(c);
  double err = 0.0, norm = 0.0;
  for (std::size_t idx = 0; idx < s.cell_count(); ++idx) {
    const Vec3 d = s.center_of(s.unlinear(idx)) - c0;
    const double g = A * h * h * h * std::pow(4 * kPi * beta * t, -1.5) *
                     std::exp(-dot(d, d) / (4 * beta * t));
    const double v = st.T_m[idx] - cp.T_amb;
    err += (v - g) * (v - g);
    norm += g * g;
  }
  const double l2 = std::sqrt(err / norm);
  return {l2 < 0.05, fmt("relative L2 %.4f at sigma = 10 cells", l2)};
}

// ---- 3 ---------------------------------------------------------------------

double radiative_oracle(double T, double gamma, double T_amb, double t, int steps) {
  const double dt = t / steps;
  auto f = [&](double x) { return gamma * (std::pow(T_amb, 4) - std::pow(x, 4)); };
  for (int n = 0; n < steps; ++n) {
    const double k1 = f(T), k2 = f(T + 0.5 * dt * k1), k3 = f(T + 0.5 * dt * k2),
                 k4 = f(T + dt * k3);
    T += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return T;
}

Outcome radiative_cooling() {
  const GridSpec s(5, 5, 5, {}, 0.1);
  OccupancyGrid occ(s);
  occ.set_solid({2, 2, 2}, 1, false);
  CharParams cp;
  cp.gamma_m = 1e-10;
  const SolidProperties props = resolve_solid_properties(occ, one_material(1e-3, false), cp);
  CharState st(s, cp.T_amb);
  st.T_m.at({2, 2, 2}) = static_cast<float>(cp.T_burn);
  const double dt = 1.0 / 30.0;
  double worst = 0.0;
  for (int n = 1; n <= 300; ++n) {
    heat_step(st, props, cp, dt);
    const double want = radiative_oracle(cp.T_burn, cp.gamma_m, cp.T_amb, n * dt, n * 200);
    worst = std::max(worst, std::abs(st.T_m.at({2, 2, 2}) - want) / want);
  }
  return {worst <= 0.01, fmt("worst relative error %.2e over 300 steps", worst)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome emissive_slab() {
  const GridSpec s(16, 16, 16, {}, 1.0 / 16);
  ScalarField Y(s, 0.8f), T(s, 1500.0f);
  RenderParams p;
  p.n_fine = 1024;
  p.sigma_a = 2.0;
  const SpectralTable& table = SpectralTable::standard();
  const XYZ E = spectrum_to_xyz(planck_spectrum(table, 1500.0), table);
  const SmokeColors smoke(s, {1.0, 1.0, 1.0});
  const Ray ray{{-1.0, 0.5, 0.5}, {1.0, 0.0, 0.0}};
  double worst = 0.0;
  for (double d : {0.1, 0.25, 0.5, 1.0}) {
    const RaySamples rs = sample_ray(ray, Y, 1.0 + d, p);
    const FireSmokeResult r = integrate_fire_smoke(ray, rs, Y, T, smoke, default_blackbody_table(), p);
    const double tr = std::exp(-p.sigma_a * d), a = 1.0 - tr;
    for (auto [got, want] : {std::pair{r.fire.X, E.X * a}, {r.fire.Y, E.Y * a}, {r.fire.Z, E.Z * a},
                             {r.transmittance, tr}})
      worst = std::max(worst, std::abs(got - want) / want);
  }
  return {worst <= 0.005, fmt("worst relative error %.2e", worst)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome wien() {
  const double step = 1e-9;
  double worst = 0.0;
  for (double T : {1000.0, 1500.0, 2000.0, 2500.0}) {
    double best_w = 0, best = -1;
    for (double w = 200e-9; w < 8000e-9; w += step) {
      const double L = planck_radiance(w, T);
      if (L > best) {
        best = L;
        best_w = w;
      }
    }
    worst = std::max(worst, std::abs(best_w - 2.898e-3 / T) / step);
  }
  return {worst <= 1.0, fmt("worst offset %.2f bins of 1 nm", worst)};
}

// ---- 6 ---------------------------------------------------------------------

Outcome adaptation_fixed_point() {
  const SpectralTable& t = SpectralTable::standard();
  double worst = 0.0;
  for (double T : {1000.0, 1500.0, 1800.0, 2500.0, 3000.0}) {
    XYZ w = spectrum_to_xyz(planck_spectrum(t, T), t);
    w = w * (1.0 / w.Y);
    const XYZ o = adapt_cat02(w, T, t);
    worst = std::max({worst, std::abs(o.X / kD65White.X - 1), std::abs(o.Y / kD65White.Y - 1),
                      std::abs(o.Z / kD65White.Z - 1)});
  }
  return {worst <= 1e-6, fmt("worst relative deviation from D65 %.2e", worst)};
}

// ---- 7, 8 --------------------------------------------------------------------

Outcome identity_compositing(const Scene& scene, const CameraView& view) {
  const FireState fire(scene.config.grid);
  const CharState solid(scene.config.grid, scene.config.charring.T_amb);
  const FrameBuffers fb = render_state(scene, fire, solid, view.camera, view.gbuffer);
  std::size_t bad = 0;
  for (std::size_t px = 0; px < view.gbuffer.pixel_count(); ++px) {
    const DisplayRGB d = tonemap(view.gbuffer.color[px], scene.config.render.exposure);
    bad += fb.image.rgb[px * 3] != quantize(d.r) || fb.image.rgb[px * 3 + 1] != quantize(d.g) ||
           fb.image.rgb[px * 3 + 2] != quantize(d.b);
  }
  return {bad == 0, fmt("%zu of %zu pixels differ (%dx%d demo view '%s')", bad,
                        view.gbuffer.pixel_count(), view.camera.width, view.camera.height,
                        view.id.c_str())};
}

Outcome charring_endpoints() {
  const GridSpec s(16, 16, 16, {}, 1.0 / 16);
  OccupancyGrid occ(s);
  const Index3 c{8, 8, 4};
  occ.set_solid(c, 1, true);
  ScalarField M_c(s);
  GBuffer g(1, 1);
  g.color[0] = {0.3, 0.6, 0.9};
  g.depth[0] = 1.0f;
  g.normal[0] = {0, 0, 1};
  g.position = {s.center_of(c) + Vec3{0, 0, 0.5 * s.spacing()}};
  const Vec3 eye = g.position[0] + Vec3{0, 0, 1};
  const FrameContext ctx;
  const RenderParams p;
  auto shade = [&](double m) {
    M_c.at(c) = static_cast<float>(m);
    return shade_background(g, 0, eye, M_c, occ, ctx, p);
  };
  const bool onset = shade(p.M_c_dark) == g.color[0] && shade(0.0) == g.color[0];
  const bool full = shade(1.0) == g.color[0] * p.r_dark;
  bool monotone = true;
  double prev = g.color[0].g;
  for (int n = 0; n <= 1000; ++n) {
    const float m = static_cast<float>(n / 1000.0);
    const double v = shade(m).g;
    monotone &= v <= prev;
    prev = v;
  }
  return {onset && full && monotone, fmt("undimmed at M_c_dark: %s, r_dark at 1: %s, monotone: %s",
                                         onset ? "yes" : "no", full ? "yes" : "no",
                                         monotone ? "yes" : "no")};
}

// ---- 9 ---------------------------------------------------------------------

Outcome char_invariants(const RunConfig& config) {
  const Scene scene = load_scene(config);
  Simulation sim(scene);
  sim.ignite(config.ignite);
  ScalarField prev = sim.solid().M_c;
  std::size_t violations = 0;
  std::string first;
  for (int f = 1; f <= 300; ++f) {
    sim.step();
    const ScalarField& M = sim.solid().M_c;
    const FireState& g = sim.fire();
    for (std::size_t idx = 0; idx < M.size(); ++idx) {
      const bool ok = M[idx] >= prev[idx] && M[idx] >= 0.0f && M[idx] <= 1.0f &&
                      g.Y[idx] >= 0.0f && g.Y[idx] <= 1.0f && std::isfinite(g.u.x[idx]) &&
                      std::isfinite(g.u.y[idx]) && std::isfinite(g.u.z[idx]) &&
                      std::isfinite(g.p[idx]) && std::isfinite(sim.solid().T_m[idx]);
      if (!ok && violations++ == 0) first = fmt(" (first at frame %d, cell %zu)", f, idx);
    }
    prev = M;
  }
  std::size_t charred = 0;
  for (float m : prev.values()) charred += m > 0.0f;
  return {violations == 0,
          fmt("%zu violations over 300 frames at %d^3, %zu cells charred", violations,
              config.grid.nx(), charred) + first};
}

// ---- 10 --------------------------------------------------------------------

int spread_frame(int gap) {
  const GridSpec s(8 + gap + 2, 6, 6, {}, 0.05);
  OccupancyGrid occ(s);
  for (int k = 1; k < 5; ++k)
    for (int j = 1; j < 5; ++j) {
      for (int i = 1; i < 5; ++i) occ.set_solid({i, j, k}, 1, true);
      for (int i = 5 + gap; i < 9 + gap; ++i) occ.set_solid({i, j, k}, 1, true);
    }
  const CharParams cp;
  const SolidProperties props = resolve_solid_properties(occ, one_material(2e-3, true), cp);
  CharState st(s, cp.T_amb);
  st.T_m.at({1, 2, 2}) = static_cast<float>(cp.T_burn);
  for (int f = 1; f <= 500; ++f) {
    heat_step(st, props, cp, 1.0 / 30.0);
    char_update(st, props, 1.0 / 30.0);
    for (int k = 1; k < 5; ++k)
      for (int j = 1; j < 5; ++j)
        for (int i = 5 + gap; i < 9 + gap; ++i)
          if (st.T_m.at({i, j, k}) >= cp.T_ign) return f;
  }
  return -1;
}

Outcome spread() {
  const int touching = spread_frame(0), gap = spread_frame(2);
  return {touching > 0 && gap == -1,
          fmt("touching: T_ign at frame %d; 2-cell gap: %s", touching,
              gap == -1 ? "never within 500" : fmt("frame %d", gap).c_str())};
}

// ---- 11, 13 ----------------------------------------------------------------

struct Trial {
  Vec3 centroid;
  std::size_t positive = 0;
};

Trial simulate(const RunConfig& base, std::vector<std::string> sets, int frames) {
  const RunConfig cfg = read_config(base.source, sets);
  const Scene scene = load_scene(cfg);
  Simulation sim(scene);
  sim.ignite(cfg.ignite);
  for (int f = 0; f < frames; ++f) sim.step();
  return {y_centroid(sim.fire().Y), count_positive(sim.fire().Y)};
}

// Blackbody-luminance weighted centroid of the emitting gas.
Vec3 emission_centroid(const FireState& fire, const OccupancyGrid& occ, const SimParams& sp,
                       const RenderParams& rp) {
  const GridSpec& s = fire.Y.spec();
  const BlackbodyTable& bb = default_blackbody_table();
  Vec3 acc;
  double w = 0.0;
  for (std::size_t idx = 0; idx < s.cell_count(); ++idx) {
    if (!occ.is_air(idx) || !(fire.Y[idx] > rp.Y_smoke)) continue;
    const double e = bb(temperature_from_Y(fire.Y[idx], sp)).Y;
    acc += s.center_of(s.unlinear(idx)) * e;
    w += e;
  }
  return w > 0 ? acc / w : Vec3{NAN, NAN, NAN};
}

Outcome control_monotonicity(const RunConfig& base, const DemoScene& demo) {
  const int frames = 100;
  const Trial ref = simulate(base, {}, frames);
  const Trial hot = simulate(base, {"sim.alpha=0.008"}, frames);
  const Trial slow = simulate(base, {"sim.k=0.5"}, frames);
  const Trial windy = simulate(base, {"sim.wind=2, 0, 0"}, frames);
  const bool a = hot.centroid.z > ref.centroid.z;
  const bool k = slow.positive > ref.positive;
  const bool w = windy.centroid.x > ref.centroid.x;

  // Ignition on the -x face versus the +x face, compared after 15 frames.
  auto early = [&](Index3 seed) {
    const Scene scene = load_scene(base);
    Simulation sim(scene);
    sim.ignite(std::span(&seed, 1));
    for (int f = 0; f < 15; ++f) sim.step();
    return emission_centroid(sim.fire(), scene.occupancy, base.sim, base.render);
  };
  const Index3 west = demo.ignition;
  const Index3 east{demo.box_hi.i, west.j, west.k};
  const Vec3 ew = early(west), ee = early(east);
  const bool moved = ee.x > ew.x + 0.5 * (demo.box_hi.i - demo.box_lo.i) * base.grid.spacing();

  std::ostringstream d;
  d << fmt("alpha 0.004->0.008: centroid z %.4f->%.4f %s; ", ref.centroid.z, hot.centroid.z,
           a ? "ok" : "NOT raised")
    << fmt("k 1->0.5: Y>0 cells %zu->%zu %s; ", ref.positive, slow.positive, k ? "ok" : "NOT raised")
    << fmt("wind +x: centroid x %.4f->%.4f %s; ", ref.centroid.x, windy.centroid.x,
           w ? "ok" : "NOT shifted")
    << fmt("ignition -x->+x face: emission x %.4f->%.4f %s", ew.x, ee.x, moved ? "ok" : "NOT moved");
  return {a && k && w && moved, d.str()};
}

Outcome throughput(const RunConfig& config) {
  const Scene scene = load_scene(config);
  const CameraView view = load_camera_view(config.cameras.at(0));
  Simulation sim(scene);
  sim.ignite(config.ignite);
  const int frames = 30, rendered = 3;
  double sim_ms = 0, gs_ms = 0, fs_ms = 0;
  for (int f = 0; f < frames; ++f) {
    const FrameRecord r = sim.step();
    sim_ms += r.sim_ms;
    if (f >= frames - rendered) {
      const FrameBuffers fb = render_state(scene, sim.fire(), sim.solid(), view.camera, view.gbuffer);
      gs_ms += fb.timings.gs_ms;
      fs_ms += fb.timings.fire_smoke_ms;
    }
  }
  const double s_sim = sim_ms / frames / 1000, s_gs = gs_ms / rendered / 1000,
               s_fs = fs_ms / rendered / 1000, total = s_sim + s_gs + s_fs;
  return {true, fmt("s/frame at %d^3, %dx%d: simulation %.3f, GS render %.3f, fire-smoke %.3f, "
                    "total %.3f (target < 10: %s)",
                    config.grid.nx(), view.camera.width, view.camera.height, s_sim, s_gs, s_fs,
                    total, total < 10 ? "met" : "missed")};
}

// ---- 12 --------------------------------------------------------------------

Outcome round_trips() {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> dim(2, 7), side(1, 7), small(1, 5);
  auto bits = [&] {
    while (true) {
      const float v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
      if (std::isfinite(v)) return v;
    }
  };
  auto pos = [&] {
    while (true) {
      const float v = std::abs(bits());
      if (v > 0) return v;
    }
  };
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GridSpec s(dim(rng), dim(rng), dim(rng), {bits(), bits(), bits()}, pos());
    std::vector<ScalarField> fields(small(rng), ScalarField(s));
    std::vector<const ScalarField*> ptrs;
    for (ScalarField& f : fields) {
      for (float& v : f.storage()) v = bits();
      ptrs.push_back(&f);
    }
    const Bytes vg = encode_vgrid(ptrs);
    const VgridData d = decode_vgrid(vg);
    bool ok = d.spec == s && d.channels.size() == fields.size() && encode_vgrid(ptrs) == vg;
    for (std::size_t c = 0; ok && c < fields.size(); ++c)
      ok = std::memcmp(d.channels[c].values().data(), fields[c].values().data(), s.cell_count() * 4) == 0;

    std::vector<LabeledPoint> pts(rng() % 50);
    for (LabeledPoint& p : pts) p = {{bits(), bits(), bits()}, bits(), static_cast<std::uint32_t>(rng())};
    const Bytes pb = encode_points(pts);
    const std::vector<LabeledPoint> back = decode_points(pb);
    ok = ok && back.size() == pts.size();
    for (std::size_t n = 0; ok && n < pts.size(); ++n)
      for (int a = 0; a < 3; ++a)
        ok = ok && std::bit_cast<std::uint64_t>(back[n].position[a]) ==
                       std::bit_cast<std::uint64_t>(pts[n].position[a]);
    ok = ok && encode_points(back) == pb;

    FloatPlane plane{side(rng), side(rng), small(rng), {}};
    plane.data.resize(static_cast<std::size_t>(plane.width) * plane.height * plane.channels);
    for (float& v : plane.data) v = bits();
    const FloatPlane fp = decode_plane(encode_plane(plane));
    ok = ok && fp.width == plane.width && fp.height == plane.height && fp.channels == plane.channels &&
         std::memcmp(fp.data.data(), plane.data.data(), plane.data.size() * 4) == 0;
    failures += !ok;
  }
  return {failures == 0, fmt("%d of 1000 VGRD/PNTS/FPLN trials differ", failures)};
}

// ---- 14 --------------------------------------------------------------------

int cli(const std::string& args) {
  const std::string cmd = std::string(EMBER_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  TempDir dir("det");
  int codes = 0;
  for (const char* tag : {"a", "b"}) {
    const fs::path d = dir.path / tag;
    codes |= cli("demo " + d.string() + " --frames 30");
    codes |= cli("sim " + (d / "demo.cfg").string());
    codes |= cli("render " + (d / "demo.cfg").string());
  }
  if (codes != 0) return {false, "a CLI step exited non-zero"};
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir.path / "a");
    const std::string ext = rel.extension().string();
    if (ext != ".ppm" && ext != ".vgrd" && ext != ".pnts" && ext != ".fpln") continue;
    ++files;
    const fs::path other = dir.path / "b" / rel;
    differ += !fs::exists(other) || read_file(other) != read_file(e.path());
  }
  std::size_t frames = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "a/out/render"))
    frames += e.path().extension() == ".ppm";
  return {differ == 0 && frames > 0,
          fmt("%zu binary outputs compared (%zu rendered frames), %zu differ", files, frames, differ)};
}

}  // namespace

// With arguments, runs only the listed criteria.
int main(int argc, char** argv) {
  std::cout << std::unitbuf;
  std::vector<int> only;
  for (int a = 1; a < argc; ++a) only.push_back(std::atoi(argv[a]));
  int failed = 0, ran = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& f) {
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) return;
    ++ran;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << n << ": " << name << " -- " << o.detail
              << fmt(" [%.1f s]", seconds_since(start)) << "\n";
  };

  TempDir scenes("scenes");
  DemoOptions o64;
  o64.frames = 300;
  const RunConfig demo64 = read_config(write_demo(scenes.path / "r64", o64));
  DemoOptions o96 = o64;
  o96.resolution = 96;
  const RunConfig demo96 = read_config(write_demo(scenes.path / "r96", o96));

  report(1, "projection residual", projection_residual);
  report(2, "heat kernel", heat_kernel);
  report(3, "radiative cooling", radiative_cooling);
  report(4, "emissive slab", emissive_slab);
  report(5, "Wien displacement", wien);
  report(6, "chromatic adaptation fixed point", adaptation_fixed_point);
  report(7, "identity compositing", [&] {
    const Scene scene = load_scene(demo64);
    Outcome all{true, ""};
    for (const CameraEntry& e : demo64.cameras) {
      const Outcome o = identity_compositing(scene, load_camera_view(e));
      all.pass &= o.pass;
      all.detail += (all.detail.empty() ? "" : "; ") + o.detail;
    }
    return all;
  });
  report(8, "charring endpoints", charring_endpoints);
  report(9, "char invariants", [&] { return char_invariants(demo64); });
  report(10, "inter-object spread", spread);
  report(11, "control monotonicity", [&] {
    DemoOptions o;
    o.resolution = 96;
    return control_monotonicity(demo96, make_demo_scene(o));
  });
  report(12, "format round trips", round_trips);
  report(13, "throughput", [&] { return throughput(demo96); });
  report(14, "end-to-end determinism", determinism);

  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " of " << ran << " failing\n";
  return failed ? 1 : 0;
}
