// Helpers shared by the test binaries.
#pragma once

#include <cmath>
#include <limits>

#include "ember/char_sim.hpp"
#include "ember/demo.hpp"
#include "ember/fire_sim.hpp"

namespace ember::testing {

// Demo geometry with its physics, stepped the same way the CLI does.
struct World {
  DemoScene demo;
  OccupancyGrid occ;
  SolidProperties props;
  SimParams sim;
  CharParams chr;
  FireState fire;
  CharState solid;

  explicit World(int resolution, SimParams s = {}, CharParams c = {}) : sim(s), chr(c) {
    DemoOptions o;
    o.resolution = resolution;
    o.width = 8;
    o.height = 6;
    demo = make_demo_scene(o);
    occ = build_occupancy(demo.points, demo.grid, demo.materials, 0.5);
    props = resolve_solid_properties(occ, demo.materials, chr);
    fire = FireState(demo.grid);
    solid = CharState(demo.grid, chr.T_amb);
  }

  void ignite(Index3 c) { ember::ignite(fire, solid.T_m, occ, std::span(&c, 1), chr); }
  void ignite() { ignite(demo.ignition); }
  // Every box cell on the -x face.
  void ignite_face() {
    for (int k = demo.box_lo.k; k <= demo.box_hi.k; ++k)
      for (int j = demo.box_lo.j; j <= demo.box_hi.j; ++j) ignite({demo.box_lo.i, j, k});
  }

  StepDiagnostics step() {
    const StepDiagnostics d = fire_step(fire, solid, occ, props, sim);
    heat_step(solid, props, chr, sim.dt);
    char_update(solid, props, sim.dt);
    return d;
  }
};

// Y-weighted centroid; NaN when there is no Y.
inline Vec3 y_centroid(const ScalarField& Y) {
  const GridSpec& s = Y.spec();
  Vec3 acc;
  double w = 0.0;
  for (std::size_t n = 0; n < Y.size(); ++n) {
    if (Y[n] <= 0.0f) continue;
    acc += s.center_of(s.unlinear(n)) * static_cast<double>(Y[n]);
    w += Y[n];
  }
  if (w == 0.0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  return acc / w;
}

inline std::size_t count_positive(const ScalarField& Y) {
  std::size_t c = 0;
  for (float v : Y.values()) c += v > 0.0f;
  return c;
}

}  // namespace ember::testing
