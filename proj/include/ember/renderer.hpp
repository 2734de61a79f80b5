#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ember/char_sim.hpp"
#include "ember/grid.hpp"
#include "ember/materials.hpp"
#include "ember/spectral.hpp"

namespace ember {

// Pinhole camera; camera space looks down +z with +x right and +y down.
struct Camera {
  int width = 0, height = 0;
  double fx = 1, fy = 1, cx = 0, cy = 0;
  std::array<double, 16> world_from_camera{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  Vec3 position() const { return {world_from_camera[3], world_from_camera[7], world_from_camera[11]}; }
  Vec3 rotate(Vec3 d) const;
  // Throws InputError if intrinsics are invalid or the rotation block is not
  // orthonormal within `tol`.
  void validate(double tol = 1e-6) const;
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
  Vec3 at(double t) const { return origin + dir * t; }
};

Ray generate_ray(const Camera& camera, int i, int j);

// Per-pixel background standing in for the rendered reconstruction.
struct GBuffer {
  int width = 0, height = 0;
  std::vector<LinearRGB> color;
  std::vector<float> depth;     // distance along the pixel ray; +inf for sky
  std::vector<Vec3> normal;     // world space, unit where depth is finite
  std::vector<Vec3> position;   // surface point; filled by derive_positions

  GBuffer() = default;
  GBuffer(int w, int h);
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  void derive_positions(const Camera& camera);
};

struct RenderParams {
  double sigma_a = 20.0;        // fire absorption, 1/m
  double Y_smoke = 0.2;         // smoke threshold on Y
  double sigma_s_smoke = 10.0;  // smoke extinction per unit Y, 1/m
  double smoke_ambient = 0.6;   // brightness of the smoke pseudo-emission
  double M_c_dark = 0.2;        // charring onset
  double r_dark = 0.15;         // dimming at full char
  double k_d = 1.0;
  double k_s = 0.2;
  double shininess = 8.0;
  double T_light = 1200.0;      // K; hotter gas voxels illuminate the scene
  int max_lights = 128;
  int n_coarse = 128;
  int n_fine = 1024;
  double exposure = 1.0;
  // Scene-linear units per W sr^-1 m^-2 of blackbody radiance.
  double fire_gain = 0.01;
  // Weight Phong terms by voxel volume / distance^2.
  bool phong_falloff = true;
  // Lowest temperature used as the adaptation white. Deep-red blackbodies
  // have a negative CAT02 M response and cannot serve as a white.
  double adaptation_min_T = 1000.0;

  void validate() const;
};

// Ordered sample distances along a ray with the segment each one represents.
struct RaySamples {
  std::vector<double> t;
  std::vector<double> dt;

  bool empty() const { return t.empty(); }
};

// Parametric interval of the ray inside an axis-aligned box; false if missed.
bool intersect_box(const Ray& ray, Vec3 lo, Vec3 hi, double& t_near, double& t_far);

// Coarse uniform pass on [t0, t1] followed by fine samples drawn from the
// piecewise-constant Y (+1e-4) distribution of the coarse pass.
RaySamples sample_interval(const Ray& ray, const ScalarField& Y, double t0, double t1,
                           int n_coarse, int n_fine, RaySamples* scratch = nullptr);
// Samples the part of the ray inside the grid and nearer than t_max.
RaySamples sample_ray(const Ray& ray, const ScalarField& Y, double t_max,
                      const RenderParams& params);

// Smoke colour per cell: the material of the nearest burning solid (or the
// nearest combustible solid when nothing burns).
class SmokeColors {
 public:
  SmokeColors() = default;
  SmokeColors(const OccupancyGrid& occupancy, const MaterialTable& materials,
              const CharState& solid, const SolidProperties& props);
  // Uniform colour everywhere.
  SmokeColors(const GridSpec& spec, Rgb color);

  Rgb at(Vec3 p) const;

 private:
  GridSpec spec_;
  std::vector<std::uint16_t> palette_index_;
  std::vector<Rgb> palette_;
};

struct FireSmokeResult {
  XYZ fire;         // pre-adaptation
  LinearRGB smoke;
  double transmittance = 1.0;
};

FireSmokeResult integrate_fire_smoke(const Ray& ray, const RaySamples& samples,
                                     const ScalarField& Y, const ScalarField& T,
                                     const SmokeColors& smoke, const BlackbodyTable& emission,
                                     const RenderParams& params);

struct Light {
  Vec3 position;
  LinearRGB radiance;  // adapted, scaled by fire_gain and the sampling weight
};

// Everything shared by the pixels of one frame.
struct FrameContext {
  double T_max_scene = 0.0;
  ChromaticAdapter adapter{kD65White};
  std::vector<Light> lights;
  std::size_t hot_voxels = 0;
  SmokeColors smoke;
  bool has_volume = false;
  Vec3 volume_lo, volume_hi;  // box enclosing every cell where Y can be > 0
};

struct RenderInputs {
  const ScalarField& Y;
  const ScalarField& T;  // gas temperature, K
  const CharState& solid;
  const OccupancyGrid& occupancy;
  const MaterialTable& materials;
  const SolidProperties& props;
  double T_air = 300.0;
};

const BlackbodyTable& default_blackbody_table();

FrameContext prepare_frame(const RenderInputs& in, const RenderParams& params);

// Adapted, gain-scaled linear colour of a fire XYZ radiance.
LinearRGB fire_to_linear(XYZ fire, const FrameContext& ctx, const RenderParams& params);

// Background radiance at pixel `pixel`: charring-dimmed G-buffer colour plus
// Phong fire illumination. Sky pixels are returned unchanged.
LinearRGB shade_background(const GBuffer& gbuffer, std::size_t pixel, Vec3 view_origin,
                           const ScalarField& M_c, const OccupancyGrid& occupancy,
                           const FrameContext& ctx, const RenderParams& params);
double char_dim_factor(double M_c, const RenderParams& params);

struct Image8 {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
  friend bool operator==(const Image8&, const Image8&) = default;
};

std::uint8_t quantize(double display_value);

struct RenderTimings {
  double fire_smoke_ms = 0.0;
  double gs_ms = 0.0;
};

struct FrameBuffers {
  int width = 0, height = 0;
  std::vector<LinearRGB> linear;   // composite before tone mapping
  std::vector<LinearRGB> volume;   // fire + smoke
  std::vector<float> transmittance;
  Image8 image;
  RenderTimings timings;
};

// Throws InputError when the G-buffer does not match the camera resolution.
FrameBuffers render_frame(const Camera& camera, const RenderInputs& in, const GBuffer& gbuffer,
                          const RenderParams& params);

}  // namespace ember
