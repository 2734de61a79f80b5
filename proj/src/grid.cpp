#include "ember/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ember/materials.hpp"

namespace ember {

GridSpec::GridSpec(int nx, int ny, int nz, Vec3 origin, double spacing)
    : n_{nx, ny, nz},
      origin_{static_cast<float>(origin.x), static_cast<float>(origin.y),
              static_cast<float>(origin.z)},
      h_(static_cast<float>(spacing)) {
  if (nx < 2 || ny < 2 || nz < 2) throw InputError("grid dims must all be >= 2");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw InputError("grid spacing must be positive");
  if (!is_finite(origin_)) throw InputError("grid origin must be finite");
}

Index3 GridSpec::index_of(Vec3 p) const {
  const Vec3 g = (p - origin_) / h_;
  return {static_cast<int>(std::floor(g.x)), static_cast<int>(std::floor(g.y)),
          static_cast<int>(std::floor(g.z))};
}

float ScalarField::max_value() const {
  float m = -std::numeric_limits<float>::infinity();
  for (float v : values_) m = std::max(m, v);
  return m;
}

float ScalarField::min_value() const {
  float m = std::numeric_limits<float>::infinity();
  for (float v : values_) m = std::min(m, v);
  return m;
}

double ScalarField::sum() const {
  double s = 0;
  for (float v : values_) s += v;
  return s;
}

bool ScalarField::all_finite() const {
  for (float v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double VectorField::max_magnitude() const {
  double m = 0;
  for (std::size_t n = 0; n < x.size(); ++n) m = std::max(m, length(at(n)));
  return m;
}

TrilinearStencil::TrilinearStencil(const GridSpec& spec, Vec3 p) {
  const double h = spec.spacing();
  const Vec3 o = spec.origin();
  std::array<int, 3> base_idx{};
  std::array<float, 3> t{};
  for (int a = 0; a < 3; ++a) {
    const int n = spec.dim(a);
    double g = (p[a] - o[a]) / h - 0.5;
    if (!(g > 0.0)) g = 0.0;  // also catches NaN
    if (g > n - 1) g = n - 1;
    int i0 = static_cast<int>(g);
    if (i0 > n - 2) i0 = n - 2;
    base_idx[a] = i0;
    t[a] = static_cast<float>(g - i0);
  }
  base = spec.linear(base_idx[0], base_idx[1], base_idx[2]);
  stride_y = static_cast<std::size_t>(spec.nx());
  stride_z = static_cast<std::size_t>(spec.nx()) * spec.ny();
  tx = t[0];
  ty = t[1];
  tz = t[2];
}

float sample_trilinear(const ScalarField& field, Vec3 p) {
  return TrilinearStencil(field.spec(), p).apply(field.values());
}

Vec3 sample_trilinear(const VectorField& field, Vec3 p) {
  const TrilinearStencil s(field.spec(), p);
  return {s.apply(field.x.values()), s.apply(field.y.values()), s.apply(field.z.values())};
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t c = 0;
  for (auto v : occupied) c += v != 0;
  return c;
}

std::size_t OccupancyGrid::combustible_count() const {
  std::size_t c = 0;
  for (auto v : combustible) c += v != 0;
  return c;
}

void OccupancyGrid::set_solid(Index3 c, std::int32_t material_id, bool is_combustible) {
  const std::size_t idx = spec.linear(c);
  occupied[idx] = 1;
  combustible[idx] = is_combustible ? 1 : 0;
  material[idx] = material_id;
}

OccupancyGrid build_occupancy(std::span<const LabeledPoint> points, const GridSpec& spec,
                              const MaterialTable& materials, double opacity_threshold) {
  if (!(opacity_threshold >= 0.0 && opacity_threshold <= 1.0))
    throw InputError("opacity threshold must lie in [0,1]");

  OccupancyGrid grid(spec);
  // Opacity of the point currently defining each cell's material.
  std::vector<float> best(spec.cell_count(), -1.0f);

  for (std::size_t n = 0; n < points.size(); ++n) {
    const LabeledPoint& pt = points[n];
    if (!is_finite(pt.position) || !std::isfinite(pt.opacity))
      throw InputError("point " + std::to_string(n) + " has non-finite fields");
    if (!materials.contains(pt.material_id))
      throw InputError("point " + std::to_string(n) + " references unknown material " +
                       std::to_string(pt.material_id));
    if (!(pt.opacity > opacity_threshold)) continue;
    const Index3 c = spec.index_of(pt.position);
    if (!spec.contains(c)) continue;

    const std::size_t idx = spec.linear(c);
    const auto mid = static_cast<std::int32_t>(pt.material_id);
    grid.occupied[idx] = 1;
    if (materials.at(pt.material_id).burnable) grid.combustible[idx] = 1;
    if (pt.opacity > best[idx] || (pt.opacity == best[idx] && mid < grid.material[idx])) {
      best[idx] = pt.opacity;
      grid.material[idx] = mid;
    }
  }
  return grid;
}

}  // namespace ember
