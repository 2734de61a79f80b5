#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ember/grid.hpp"
#include "ember/materials.hpp"
#include "ember/renderer.hpp"

namespace ember {

// Procedural box-on-plane scene: a stone ground slab and a wooden box in a
// 1 m cube (z up), with analytic Lambertian G-buffers.
struct DemoOptions {
  int resolution = 64;  // cells per axis
  int width = 320, height = 240;
  int frames = 60;
  int snapshot_every = 10;
};

struct DemoCamera {
  std::string id;
  Camera camera;
  GBuffer gbuffer;
};

struct DemoScene {
  GridSpec grid;
  std::vector<LabeledPoint> points;
  MaterialTable materials;
  std::vector<DemoCamera> cameras;
  Index3 box_lo, box_hi;  // inclusive cell range of the box
  int ground_layers = 0;
  Index3 ignition;        // box cell at the base of the -x face
};

inline constexpr std::uint32_t kStoneId = 0;
inline constexpr std::uint32_t kWoodId = 1;

Material demo_wood();
Material demo_stone();

DemoScene make_demo_scene(const DemoOptions& options);

// Writes points, materials, cameras, gbuffers and demo.cfg into `dir`
// (created if needed). Returns the config path.
std::filesystem::path write_demo(const std::filesystem::path& dir, const DemoOptions& options);

}  // namespace ember
