#include "ember/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace ember {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string index_text(Index3 c) {
  return std::to_string(c.i) + "," + std::to_string(c.j) + "," + std::to_string(c.k);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunConfig with_options(const RunConfig& config, const RunOptions& options) {
  RunConfig c = config;
  if (options.frames) {
    if (*options.frames < 1) throw InputError("--frames must be >= 1");
    c.frames = *options.frames;
  }
  for (const Index3& v : options.ignite) {
    if (!c.grid.contains(v)) throw InputError("ignition voxel " + index_text(v) + " is outside the grid");
    c.ignite.push_back(v);
  }
  return c;
}

std::vector<CameraView> selected_views(const RunConfig& config, const RunOptions& options) {
  std::vector<CameraView> views;
  if (options.cameras.empty()) {
    for (const CameraEntry& e : config.cameras) views.push_back(load_camera_view(e));
  } else {
    for (const std::string& id : options.cameras) views.push_back(load_camera_view(config.camera(id)));
  }
  if (views.empty()) throw InputError("no cameras configured");
  return views;
}

void start_report(RunReport& report, const std::string& command, const RunConfig& config) {
  report.command = command;
  report.config = config.source;
  report.overrides = config.overrides;
}

void record_ignition(RunReport& report, const IgnitionReport& ig) {
  report.ignition = ig;
  for (const Index3& v : ig.skipped)
    report.notes.push_back("warning: ignition voxel " + index_text(v) +
                           " is not combustible; skipped");
}

void emit(std::ostream* stats, const std::string& line) {
  if (stats) *stats << line << '\n' << std::flush;
}

void write_report(const RunReport& report, const fs::path& path) {
  write_text(path, report.format());
}

}  // namespace

Scene load_scene(const RunConfig& config) {
  Scene s;
  s.config = config;
  s.points = read_points(config.points);
  s.materials = read_materials(config.materials);
  s.occupancy = build_occupancy(s.points, config.grid, s.materials, config.opacity_threshold);
  s.props = resolve_solid_properties(s.occupancy, s.materials, config.charring);
  return s;
}

std::string format_record(const FrameRecord& r) {
  std::ostringstream out;
  out << "frame=" << r.frame << " max_div=" << num(r.max_div) << " residual=" << num(r.residual)
      << " proj_iters=" << r.proj_iters << " total_Y=" << num(r.total_Y)
      << " max_T_m=" << num(r.max_T_m) << " burning=" << r.burning << " charred=" << r.charred
      << " heat_substeps=" << r.heat_substeps << " sim_ms=" << num(r.sim_ms)
      << " gs_ms=" << num(r.gs_ms) << " fire_smoke_ms=" << num(r.fire_smoke_ms);
  return out.str();
}

Simulation::Simulation(const Scene& scene)
    : scene_(scene),
      fire_(scene.config.grid),
      solid_(scene.config.grid, scene.config.charring.T_amb) {}

IgnitionReport Simulation::ignite(std::span<const Index3> voxels) {
  return ember::ignite(fire_, solid_.T_m, scene_.occupancy, voxels, scene_.config.charring);
}

FrameRecord Simulation::step() {
  const RunConfig& cfg = scene_.config;
  const auto start = Clock::now();
  const StepDiagnostics d = fire_step(fire_, solid_, scene_.occupancy, scene_.props, cfg.sim);
  FrameRecord r;
  r.heat_substeps = heat_step(solid_, scene_.props, cfg.charring, cfg.sim.dt);
  char_update(solid_, scene_.props, cfg.sim.dt);
  r.sim_ms = ms_since(start);

  r.frame = ++frame_;
  r.max_div = d.projection.div_after;
  r.residual = d.projection.residual;
  r.proj_iters = d.projection.iterations;
  r.total_Y = d.total_Y;
  r.max_T_m = cfg.charring.T_amb;
  for (std::uint32_t idx : scene_.props.solid_cells) {
    r.max_T_m = std::max(r.max_T_m, static_cast<double>(solid_.T_m[idx]));
    if (solid_.T_m[idx] >= scene_.props.T_ign[idx]) ++r.burning;
    if (solid_.M_c[idx] >= cfg.render.M_c_dark) ++r.charred;
  }
  return r;
}

CameraView load_camera_view(const CameraEntry& entry) {
  CameraView v{entry.id, read_camera(entry.file), read_gbuffer(entry.gbuffer)};
  if (v.gbuffer.width != v.camera.width || v.gbuffer.height != v.camera.height)
    throw InputError("camera '" + entry.id + "' is " + std::to_string(v.camera.width) + "x" +
                     std::to_string(v.camera.height) + " but its gbuffer is " +
                     std::to_string(v.gbuffer.width) + "x" + std::to_string(v.gbuffer.height));
  v.gbuffer.derive_positions(v.camera);
  return v;
}

FrameBuffers render_state(const Scene& scene, const FireState& fire, const CharState& solid,
                          const Camera& camera, const GBuffer& gbuffer) {
  const ScalarField T = temperature_from_Y(fire.Y, scene.config.sim);
  const RenderInputs in{fire.Y,          T,           solid, scene.occupancy,
                        scene.materials, scene.props, scene.config.sim.T_air};
  return render_frame(camera, in, gbuffer, scene.config.render);
}

std::vector<int> snapshot_frames(int frames, int snapshot_every) {
  std::vector<int> out;
  for (int f = 0; f <= frames; f += snapshot_every) out.push_back(f);
  if (out.back() != frames) out.push_back(frames);
  return out;
}

fs::path render_path(const RunConfig& config, const std::string& camera, int frame) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04d.ppm", frame);
  return config.output_dir / "render" / camera / name;
}

std::string RunReport::format() const {
  std::ostringstream out;
  out << "# ember run report\n";
  out << "command = " << command << "\n";
  out << "config = " << config.string() << "\n";
  for (const std::string& s : overrides) out << "set = " << s << "\n";
  for (const Index3& v : ignition.applied) out << "ignite = " << index_text(v) << "\n";
  for (const Index3& v : ignition.skipped) out << "ignite_skipped = " << index_text(v) << "\n";
  for (const std::string& n : notes) out << "note = " << n << "\n";
  out << "frames = " << frames.size() << "\n";
  for (const FrameRecord& r : frames) out << format_record(r) << "\n";
  for (const fs::path& p : outputs) out << "output = " << p.string() << "\n";
  out << "status = " << exit_status << "\n";
  return out.str();
}

RunReport run_sim(const RunConfig& config_in, const RunOptions& options) {
  const RunConfig config = with_options(config_in, options);
  const Scene scene = load_scene(config);
  fs::create_directories(config.output_dir);

  RunReport report;
  start_report(report, "sim", config);
  Simulation sim(scene);
  record_ignition(report, sim.ignite(config.ignite));
  for (const std::string& n : report.notes) emit(options.stats, n);

  const std::vector<int> schedule = snapshot_frames(config.frames, config.snapshot_every);
  auto snap = schedule.begin();
  auto maybe_snapshot = [&] {
    if (snap != schedule.end() && *snap == sim.frame()) {
      const fs::path p = snapshot_path(config.output_dir, sim.frame());
      write_snapshot(p, sim.fire(), sim.solid());
      report.outputs.push_back(p);
      ++snap;
    }
  };
  maybe_snapshot();
  for (int f = 0; f < config.frames; ++f) {
    report.frames.push_back(sim.step());
    emit(options.stats, format_record(report.frames.back()));
    maybe_snapshot();
  }
  write_report(report, config.output_dir / "sim_report.txt");
  return report;
}

RunReport run_render(const RunConfig& config_in, const RunOptions& options, int first, int last) {
  const RunConfig config = with_options(config_in, options);
  if (first < 0 || last < first) throw InputError("bad snapshot range");
  const Scene scene = load_scene(config);
  const std::vector<CameraView> views = selected_views(config, options);

  RunReport report;
  start_report(report, "render", config);
  for (int f : snapshot_frames(config.frames, config.snapshot_every)) {
    if (f < first || f > last) continue;
    const fs::path p = snapshot_path(config.output_dir, f);
    if (!fs::exists(p))
      throw InputError("missing snapshot for frame " + std::to_string(f) + ": " + p.string());
    const Snapshot s = read_snapshot(p);
    if (s.fire.Y.spec() != config.grid)
      throw InputError(p.string() + ": grid does not match the config");
    FrameRecord r;
    r.frame = f;
    r.total_Y = s.fire.Y.sum();
    for (const CameraView& v : views) {
      const FrameBuffers fb = render_state(scene, s.fire, s.solid, v.camera, v.gbuffer);
      r.gs_ms += fb.timings.gs_ms;
      r.fire_smoke_ms += fb.timings.fire_smoke_ms;
      const fs::path out = render_path(config, v.id, f);
      fs::create_directories(out.parent_path());
      write_ppm(out, fb.image);
      report.outputs.push_back(out);
    }
    report.frames.push_back(r);
    emit(options.stats, format_record(r));
  }
  if (report.frames.empty()) throw InputError("no snapshots in the requested range");
  write_report(report, config.output_dir / "render_report.txt");
  return report;
}

RunReport run_pipeline(const RunConfig& config_in, const RunOptions& options) {
  const RunConfig config = with_options(config_in, options);
  const Scene scene = load_scene(config);
  const std::vector<CameraView> views = selected_views(config, options);
  fs::create_directories(config.output_dir);

  RunReport report;
  start_report(report, "run", config);
  Simulation sim(scene);
  record_ignition(report, sim.ignite(config.ignite));
  for (const std::string& n : report.notes) emit(options.stats, n);

  const std::vector<int> schedule = snapshot_frames(config.frames, config.snapshot_every);
  auto next = schedule.begin();
  auto maybe_output = [&](FrameRecord* r) {
    if (next == schedule.end() || *next != sim.frame()) return;
    ++next;
    const fs::path p = snapshot_path(config.output_dir, sim.frame());
    write_snapshot(p, sim.fire(), sim.solid());
    report.outputs.push_back(p);
    for (const CameraView& v : views) {
      const FrameBuffers fb = render_state(scene, sim.fire(), sim.solid(), v.camera, v.gbuffer);
      if (r) {
        r->gs_ms += fb.timings.gs_ms;
        r->fire_smoke_ms += fb.timings.fire_smoke_ms;
      }
      const fs::path out = render_path(config, v.id, sim.frame());
      fs::create_directories(out.parent_path());
      write_ppm(out, fb.image);
      report.outputs.push_back(out);
    }
  };
  maybe_output(nullptr);
  for (int f = 0; f < config.frames; ++f) {
    FrameRecord r = sim.step();
    maybe_output(&r);
    report.frames.push_back(r);
    emit(options.stats, format_record(r));
  }
  write_report(report, config.output_dir / "run_report.txt");
  return report;
}

}  // namespace ember
