#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ember/common.hpp"

namespace ember {

class MaterialTable;

struct Index3 {
  int i = 0, j = 0, k = 0;
  friend constexpr bool operator==(Index3, Index3) = default;
};

// Uniform cell-centred voxel grid. Origin and spacing are held at f32
// precision so that a spec survives a trip through the binary formats.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int nx, int ny, int nz, Vec3 origin, double spacing);

  int nx() const { return n_[0]; }
  int ny() const { return n_[1]; }
  int nz() const { return n_[2]; }
  int dim(int axis) const { return n_[axis]; }
  std::array<int, 3> dims() const { return n_; }
  Vec3 origin() const { return origin_; }
  double spacing() const { return h_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
  }

  // x-fastest linear index.
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_[1]) * k);
  }
  std::size_t linear(Index3 c) const { return linear(c.i, c.j, c.k); }
  Index3 unlinear(std::size_t idx) const {
    const int i = static_cast<int>(idx % n_[0]);
    idx /= n_[0];
    return {i, static_cast<int>(idx % n_[1]), static_cast<int>(idx / n_[1])};
  }
  bool contains(Index3 c) const {
    return c.i >= 0 && c.j >= 0 && c.k >= 0 && c.i < n_[0] && c.j < n_[1] && c.k < n_[2];
  }

  Vec3 center_of(Index3 c) const {
    return {origin_.x + (c.i + 0.5) * h_, origin_.y + (c.j + 0.5) * h_,
            origin_.z + (c.k + 0.5) * h_};
  }
  // Cell containing `p` (may lie outside the grid; check with contains()).
  Index3 index_of(Vec3 p) const;

  Vec3 lower_corner() const { return origin_; }
  Vec3 upper_corner() const {
    return {origin_.x + n_[0] * h_, origin_.y + n_[1] * h_, origin_.z + n_[2] * h_};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::array<int, 3> n_{2, 2, 2};
  Vec3 origin_{};
  double h_ = 1.0;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& spec, float fill = 0.0f)
      : spec_(spec), values_(spec.cell_count(), fill) {}

  const GridSpec& spec() const { return spec_; }
  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }
  std::vector<float>& storage() { return values_; }

  float& operator[](std::size_t idx) { return values_[idx]; }
  float operator[](std::size_t idx) const { return values_[idx]; }
  float& at(Index3 c) { return values_[spec_.linear(c)]; }
  float at(Index3 c) const { return values_[spec_.linear(c)]; }
  std::size_t size() const { return values_.size(); }

  void fill(float v) { std::fill(values_.begin(), values_.end(), v); }
  float max_value() const;
  float min_value() const;
  double sum() const;
  bool all_finite() const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  GridSpec spec_;
  std::vector<float> values_;
};

// Collocated velocity/force storage: one scalar channel per component.
struct VectorField {
  ScalarField x, y, z;

  VectorField() = default;
  explicit VectorField(const GridSpec& spec) : x(spec), y(spec), z(spec) {}

  const GridSpec& spec() const { return x.spec(); }
  ScalarField& component(int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  const ScalarField& component(int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  Vec3 at(std::size_t idx) const { return {x[idx], y[idx], z[idx]}; }
  void set(std::size_t idx, Vec3 v) {
    x[idx] = static_cast<float>(v.x);
    y[idx] = static_cast<float>(v.y);
    z[idx] = static_cast<float>(v.z);
  }
  bool all_finite() const { return x.all_finite() && y.all_finite() && z.all_finite(); }
  double max_magnitude() const;

  friend bool operator==(const VectorField&, const VectorField&) = default;
};

// Eight-point interpolation stencil for a world position. Positions outside
// the span of cell centres are clamped onto it first. Evaluation is a chain of
// bounded lerps, so the result never leaves the range of the eight values.
struct TrilinearStencil {
  std::size_t base = 0;
  std::size_t stride_y = 0, stride_z = 0;
  float tx = 0, ty = 0, tz = 0;

  TrilinearStencil(const GridSpec& spec, Vec3 p);

  static float lerp(float a, float b, float t) {
    // Exact at both endpoints.
    const float r = t < 0.5f ? a + t * (b - a) : b - (1.0f - t) * (b - a);
    const float lo = a < b ? a : b;
    const float hi = a < b ? b : a;
    return r < lo ? lo : (r > hi ? hi : r);
  }

  float apply(std::span<const float> v) const {
    const float* p = v.data() + base;
    const float c00 = lerp(p[0], p[1], tx);
    const float c10 = lerp(p[stride_y], p[stride_y + 1], tx);
    const float c01 = lerp(p[stride_z], p[stride_z + 1], tx);
    const float c11 = lerp(p[stride_y + stride_z], p[stride_y + stride_z + 1], tx);
    return lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz);
  }
};

float sample_trilinear(const ScalarField& field, Vec3 p);
Vec3 sample_trilinear(const VectorField& field, Vec3 p);

struct LabeledPoint {
  Vec3 position;
  float opacity = 0.0f;
  std::uint32_t material_id = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct OccupancyGrid {
  GridSpec spec;
  std::vector<std::uint8_t> occupied;
  std::vector<std::uint8_t> combustible;
  // Valid only where occupied; -1 elsewhere.
  std::vector<std::int32_t> material;

  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& s)
      : spec(s),
        occupied(s.cell_count(), 0),
        combustible(s.cell_count(), 0),
        material(s.cell_count(), -1) {}

  bool is_occupied(std::size_t idx) const { return occupied[idx] != 0; }
  bool is_combustible(std::size_t idx) const { return combustible[idx] != 0; }
  bool is_air(std::size_t idx) const { return occupied[idx] == 0; }
  std::size_t occupied_count() const;
  std::size_t combustible_count() const;

  // Marks a cell solid with the given material. Used by scene builders and
  // tests that construct obstacles directly.
  void set_solid(Index3 c, std::int32_t material_id, bool is_combustible);
};

// Voxelises a labelled point set. A cell is occupied iff it contains a point
// with opacity > threshold; its material is the most opaque such point's
// (ties broken by lowest material id). Points outside the grid are ignored.
OccupancyGrid build_occupancy(std::span<const LabeledPoint> points, const GridSpec& spec,
                              const MaterialTable& materials, double opacity_threshold);

// Face neighbours in (-x, +x, -y, +y, -z, +z) order.
inline constexpr std::array<Index3, 6> kFaceOffsets{
    Index3{-1, 0, 0}, Index3{1, 0, 0}, Index3{0, -1, 0},
    Index3{0, 1, 0},  Index3{0, 0, -1}, Index3{0, 0, 1}};

inline Index3 operator+(Index3 a, Index3 b) { return {a.i + b.i, a.j + b.j, a.k + b.k}; }

}  // namespace ember
