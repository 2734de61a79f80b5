#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ember/char_sim.hpp"
#include "ember/fire_sim.hpp"
#include "ember/renderer.hpp"
#include "ember/scene_io.hpp"

namespace ember {

// Static scene data derived from a config.
struct Scene {
  RunConfig config;
  std::vector<LabeledPoint> points;
  MaterialTable materials;
  OccupancyGrid occupancy;
  SolidProperties props;
};

Scene load_scene(const RunConfig& config);

struct FrameRecord {
  int frame = 0;
  double max_div = 0.0;    // post-projection, 1/s
  double residual = 0.0;   // relative Poisson residual
  int proj_iters = 0;
  double total_Y = 0.0;
  double max_T_m = 0.0;
  std::size_t burning = 0;  // combustible cells at or above T_ign
  std::size_t charred = 0;  // cells with M_c >= M_c_dark
  int heat_substeps = 0;
  double sim_ms = 0.0;
  // Filled only by the combined pipeline.
  double gs_ms = 0.0;
  double fire_smoke_ms = 0.0;
};

std::string format_record(const FrameRecord& r);

// Gas + solid state advanced one frame at a time.
class Simulation {
 public:
  explicit Simulation(const Scene& scene);

  IgnitionReport ignite(std::span<const Index3> voxels);
  FrameRecord step();

  int frame() const { return frame_; }
  const FireState& fire() const { return fire_; }
  const CharState& solid() const { return solid_; }
  FireState& fire() { return fire_; }
  CharState& solid() { return solid_; }

 private:
  const Scene& scene_;
  FireState fire_;
  CharState solid_;
  int frame_ = 0;
};

// Renders one state through one camera.
FrameBuffers render_state(const Scene& scene, const FireState& fire, const CharState& solid,
                          const Camera& camera, const GBuffer& gbuffer);

struct CameraView {
  std::string id;
  Camera camera;
  GBuffer gbuffer;  // with positions derived
};
CameraView load_camera_view(const CameraEntry& entry);

struct RunOptions {
  std::optional<int> frames;       // replaces run.frames
  std::vector<Index3> ignite;      // added to run.ignite
  std::vector<std::string> cameras;  // empty: all configured cameras
  std::ostream* stats = nullptr;   // key=value diagnostics as they happen
};

struct RunReport {
  std::string command;
  fs::path config;
  std::vector<std::string> overrides;
  IgnitionReport ignition;
  std::vector<FrameRecord> frames;
  std::vector<std::string> notes;
  std::vector<fs::path> outputs;
  int exit_status = 0;

  std::string format() const;
};

// Frames at which snapshots are written: 0, every snapshot_every, and the last.
std::vector<int> snapshot_frames(int frames, int snapshot_every);

// Simulates and writes snapshots plus <output_dir>/sim_report.txt.
RunReport run_sim(const RunConfig& config, const RunOptions& options);

// Renders snapshots in [first, last] for the selected cameras into
// <output_dir>/render/<camera>/frame_NNNN.ppm. Throws InputError naming the
// frame when a scheduled snapshot is missing.
RunReport run_render(const RunConfig& config, const RunOptions& options, int first, int last);

// Simulation and rendering interleaved; renders at every snapshot frame.
RunReport run_pipeline(const RunConfig& config, const RunOptions& options);

fs::path render_path(const RunConfig& config, const std::string& camera, int frame);

}  // namespace ember
