#include "ember/fire_sim.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "ember/parallel.hpp"

namespace ember {

void SimParams::validate() const {
  auto fail = [](const char* msg) { throw InputError(std::string("sim params: ") + msg); };
  if (!(dt > 0)) fail("dt must be > 0");
  if (!(k >= 0)) fail("k must be >= 0");
  if (!(rho > 0)) fail("rho must be > 0");
  if (!(T_air > 0)) fail("T_air must be > 0");
  if (!(T_max > T_air)) fail("T_max must exceed T_air");
  if (!(eps_vort >= 0)) fail("eps_vort must be >= 0");
  if (!is_finite(wind)) fail("wind must be finite");
  if (projection_iters < 1) fail("projection_iters must be >= 1");
  if (!(projection_tol >= 0)) fail("projection_tol must be >= 0");
  if (!(sor_omega == 0.0 || (sor_omega > 0.0 && sor_omega < 2.0)))
    fail("sor_omega must be 0 (auto) or lie in (0,2)");
  // The curve must not dip below ambient anywhere on [0,1].
  double lo = std::min(curve(0.0), curve(1.0));
  if (curve.c2 != 0.0) {
    const double vertex = -curve.c1 / (2.0 * curve.c2);
    if (vertex > 0.0 && vertex < 1.0) lo = std::min(lo, curve(vertex));
  }
  if (!(lo >= 0.0)) fail("temperature curve must be >= 0 on [0,1]");
}

namespace {

// Same backtrace for several channels sharing one grid.
void advect_channels(const VectorField& u, double dt, std::span<const ScalarField* const> src,
                     std::span<ScalarField* const> dst) {
  const GridSpec& spec = u.spec();
  const int nx = spec.nx(), ny = spec.ny();
  const std::size_t slab = static_cast<std::size_t>(nx) * ny;
  parallel_for(static_cast<std::size_t>(spec.nz()), [&](std::size_t kb, std::size_t ke) {
    for (std::size_t k = kb; k < ke; ++k) {
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const std::size_t idx = k * slab + static_cast<std::size_t>(j) * nx + i;
          const Vec3 x = spec.center_of({i, j, static_cast<int>(k)});
          const Vec3 back = x - u.at(idx) * dt;
          const TrilinearStencil s(spec, back);
          for (std::size_t c = 0; c < src.size(); ++c) (*dst[c])[idx] = s.apply(src[c]->values());
        }
      }
    }
  });
}

inline double central_diff(std::span<const float> v, const GridSpec& spec, Index3 c, int axis) {
  std::array<int, 3> lo{c.i, c.j, c.k};
  std::array<int, 3> hi = lo;
  if (lo[axis] > 0) --lo[axis];
  if (hi[axis] < spec.dim(axis) - 1) ++hi[axis];
  const int cells = hi[axis] - lo[axis];
  if (cells == 0) return 0.0;
  return (static_cast<double>(v[spec.linear(hi[0], hi[1], hi[2])]) -
          v[spec.linear(lo[0], lo[1], lo[2])]) /
         (cells * spec.spacing());
}

}  // namespace

ScalarField advect(const ScalarField& field, const VectorField& u, double dt) {
  require(field.spec() == u.spec(), "advect: grid mismatch");
  ScalarField out(field.spec());
  const ScalarField* src[] = {&field};
  ScalarField* dst[] = {&out};
  advect_channels(u, dt, src, dst);
  return out;
}

VectorField advect(const VectorField& field, const VectorField& u, double dt) {
  require(field.spec() == u.spec(), "advect: grid mismatch");
  VectorField out(field.spec());
  const ScalarField* src[] = {&field.x, &field.y, &field.z};
  ScalarField* dst[] = {&out.x, &out.y, &out.z};
  advect_channels(u, dt, src, dst);
  return out;
}

double temperature_from_Y(double Y, const SimParams& params) {
  return params.T_air + (params.T_max - params.T_air) * params.curve(Y);
}

ScalarField temperature_from_Y(const ScalarField& Y, const SimParams& params) {
  ScalarField T(Y.spec());
  for (std::size_t n = 0; n < Y.size(); ++n)
    T[n] = static_cast<float>(temperature_from_Y(Y[n], params));
  return T;
}

VectorField vorticity_confinement(const VectorField& u, double eps, double h) {
  const GridSpec& spec = u.spec();
  VectorField omega(spec);
  ScalarField mag(spec);
  const int nx = spec.nx(), ny = spec.ny();
  const std::size_t slab = static_cast<std::size_t>(nx) * ny;

  parallel_for(static_cast<std::size_t>(spec.nz()), [&](std::size_t kb, std::size_t ke) {
    for (std::size_t k = kb; k < ke; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const Index3 c{i, j, static_cast<int>(k)};
          const std::size_t idx = k * slab + static_cast<std::size_t>(j) * nx + i;
          const Vec3 w{
              central_diff(u.z.values(), spec, c, 1) - central_diff(u.y.values(), spec, c, 2),
              central_diff(u.x.values(), spec, c, 2) - central_diff(u.z.values(), spec, c, 0),
              central_diff(u.y.values(), spec, c, 0) - central_diff(u.x.values(), spec, c, 1)};
          omega.set(idx, w);
          mag[idx] = static_cast<float>(length(w));
        }
  });

  VectorField force(spec);
  parallel_for(static_cast<std::size_t>(spec.nz()), [&](std::size_t kb, std::size_t ke) {
    for (std::size_t k = kb; k < ke; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const Index3 c{i, j, static_cast<int>(k)};
          const std::size_t idx = k * slab + static_cast<std::size_t>(j) * nx + i;
          const Vec3 g{central_diff(mag.values(), spec, c, 0),
                       central_diff(mag.values(), spec, c, 1),
                       central_diff(mag.values(), spec, c, 2)};
          const Vec3 N = g / (length(g) + 1e-10);
          force.set(idx, eps * h * cross(N, omega.at(idx)));
        }
  });
  return force;
}

void apply_forces(VectorField& u, const ScalarField& Y, const OccupancyGrid& occupancy,
                  const SimParams& params, double dt) {
  require(u.spec() == Y.spec() && u.spec() == occupancy.spec, "apply_forces: grid mismatch");
  const GridSpec& spec = u.spec();
  VectorField vort;
  const bool with_vort = params.eps_vort > 0.0;
  if (with_vort) vort = vorticity_confinement(u, params.eps_vort, spec.spacing());
  const double dT = params.T_max - params.T_air;

  parallel_for(spec.cell_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      if (occupancy.is_occupied(idx)) continue;
      Vec3 f = params.wind;
      f.z += params.alpha * dT * params.curve(Y[idx]);
      if (with_vort) f += vort.at(idx);
      if (f == Vec3{}) continue;
      u.set(idx, u.at(idx) + f * dt);
    }
  });
}

void react(ScalarField& Y, double k, double dt) {
  if (k == 0.0) return;
  const auto dec = static_cast<float>(k * dt);
  for (float& y : Y.values()) y = std::max(y - dec, 0.0f);
}

ScalarField divergence(const VectorField& u) {
  const GridSpec& spec = u.spec();
  ScalarField div(spec);
  const double inv2h = 0.5 / spec.spacing();
  const std::size_t sy = spec.nx(), sz = static_cast<std::size_t>(spec.nx()) * spec.ny();
  for (int k = 1; k < spec.nz() - 1; ++k)
    for (int j = 1; j < spec.ny() - 1; ++j)
      for (int i = 1; i < spec.nx() - 1; ++i) {
        const std::size_t idx = spec.linear(i, j, k);
        const double d = (static_cast<double>(u.x[idx + 1]) - u.x[idx - 1]) +
                         (static_cast<double>(u.y[idx + sy]) - u.y[idx - sy]) +
                         (static_cast<double>(u.z[idx + sz]) - u.z[idx - sz]);
        div[idx] = static_cast<float>(d * inv2h);
      }
  return div;
}

double max_divergence(const VectorField& u, const OccupancyGrid& occupancy) {
  const ScalarField div = divergence(u);
  double m = 0.0;
  for (std::size_t idx = 0; idx < div.size(); ++idx)
    if (occupancy.is_air(idx)) m = std::max(m, std::abs(static_cast<double>(div[idx])));
  return m;
}

namespace {

// Pressure unknowns live on interior air cells; p is zero on the domain
// boundary layer (open) and inside solids. The Laplacian is the composition of
// the central divergence and central gradient used for the velocity update,
// so the post-projection cell divergence equals the solver residual.
class PressureSolver {
 public:
  PressureSolver(const VectorField& u, const OccupancyGrid& occ, const SimParams& params)
      : spec_(u.spec()),
        px_(spec_.nx() + 2),
        py_(spec_.ny() + 2),
        pz_(spec_.nz() + 2),
        pressure_(static_cast<std::size_t>(px_) * py_ * pz_, 0.0) {
    const double h = spec_.spacing();
    const double scale = 4.0 * h * h * params.rho / params.dt;
    const ScalarField div = divergence(u);
    const std::size_t sy = spec_.nx(), sz = static_cast<std::size_t>(spec_.nx()) * spec_.ny();
    for (int k = 1; k < spec_.nz() - 1; ++k)
      for (int j = 1; j < spec_.ny() - 1; ++j)
        for (int i = 1; i < spec_.nx() - 1; ++i) {
          const std::size_t idx = spec_.linear(i, j, k);
          if (!occ.is_air(idx)) continue;
          std::uint8_t mask = 0;
          if (occ.is_air(idx - 1)) mask |= 1;
          if (occ.is_air(idx + 1)) mask |= 2;
          if (occ.is_air(idx - sy)) mask |= 4;
          if (occ.is_air(idx + sy)) mask |= 8;
          if (occ.is_air(idx - sz)) mask |= 16;
          if (occ.is_air(idx + sz)) mask |= 32;
          if (mask == 0) continue;
          cells_.push_back(static_cast<std::uint32_t>(padded(i, j, k)));
          masks_.push_back(mask);
          rhs_.push_back(scale * div[idx]);
          rhs_max_ = std::max(rhs_max_, std::abs(rhs_.back()));
        }
  }

  double rhs_max() const { return rhs_max_; }

  void sweep(double omega) {
    const std::size_t s1 = 2, s2 = 2 * static_cast<std::size_t>(px_),
                      s3 = 2 * static_cast<std::size_t>(px_) * py_;
    double* P = pressure_.data();
    for (std::size_t n = 0; n < cells_.size(); ++n) {
      const std::size_t c = cells_[n];
      const std::uint8_t m = masks_[n];
      double s = 0.0;
      if (m & 1) s += P[c - s1];
      if (m & 2) s += P[c + s1];
      if (m & 4) s += P[c - s2];
      if (m & 8) s += P[c + s2];
      if (m & 16) s += P[c - s3];
      if (m & 32) s += P[c + s3];
      const double gs = (s - rhs_[n]) / std::popcount(m);
      P[c] += omega * (gs - P[c]);
    }
  }

  double residual() const {
    const std::size_t s1 = 2, s2 = 2 * static_cast<std::size_t>(px_),
                      s3 = 2 * static_cast<std::size_t>(px_) * py_;
    const double* P = pressure_.data();
    double r = 0.0;
    for (std::size_t n = 0; n < cells_.size(); ++n) {
      const std::size_t c = cells_[n];
      const std::uint8_t m = masks_[n];
      double s = 0.0;
      if (m & 1) s += P[c - s1];
      if (m & 2) s += P[c + s1];
      if (m & 4) s += P[c - s2];
      if (m & 8) s += P[c + s2];
      if (m & 16) s += P[c - s3];
      if (m & 32) s += P[c + s3];
      r = std::max(r, std::abs(rhs_[n] - (s - std::popcount(m) * P[c])));
    }
    return rhs_max_ > 0.0 ? r / rhs_max_ : 0.0;
  }

  void store(ScalarField& p) const {
    for (int k = 0; k < spec_.nz(); ++k)
      for (int j = 0; j < spec_.ny(); ++j)
        for (int i = 0; i < spec_.nx(); ++i)
          p[spec_.linear(i, j, k)] = static_cast<float>(pressure_[padded(i, j, k)]);
  }

  double optimal_omega() const {
    double rho = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double m = spec_.dim(a) / 2.0;
      rho += std::cos(M_PI / (m + 1.0));
    }
    rho /= 3.0;
    return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
  }

 private:
  std::size_t padded(int i, int j, int k) const {
    return static_cast<std::size_t>(i + 1) +
           static_cast<std::size_t>(px_) *
               (static_cast<std::size_t>(j + 1) + static_cast<std::size_t>(py_) * (k + 1));
  }

  GridSpec spec_;
  int px_, py_, pz_;
  std::vector<double> pressure_;
  std::vector<std::uint32_t> cells_;
  std::vector<std::uint8_t> masks_;
  std::vector<double> rhs_;
  double rhs_max_ = 0.0;
};

}  // namespace

ProjectionReport project(VectorField& u, ScalarField& p, const OccupancyGrid& occupancy,
                         const SimParams& params) {
  require(u.spec() == occupancy.spec && p.spec() == u.spec(), "project: grid mismatch");
  const GridSpec& spec = u.spec();
  ProjectionReport report;
  report.div_before = max_divergence(u, occupancy);

  PressureSolver solver(u, occupancy, params);
  if (solver.rhs_max() > 0.0) {
    const double omega = params.sor_omega > 0.0 ? params.sor_omega : solver.optimal_omega();
    constexpr int kCheckEvery = 5;
    report.residual = 1.0;
    while (report.iterations < params.projection_iters) {
      solver.sweep(omega);
      ++report.iterations;
      if (report.iterations % kCheckEvery == 0 || report.iterations == params.projection_iters) {
        report.residual = solver.residual();
        if (report.residual <= params.projection_tol) break;
      }
    }
  }
  solver.store(p);

  // u -= (dt/rho) grad p on every air cell, p = 0 beyond the domain.
  const double c = params.dt / params.rho / (2.0 * spec.spacing());
  const int nx = spec.nx(), ny = spec.ny(), nz = spec.nz();
  const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;
  std::span<const float> P = p.values();
  parallel_for(static_cast<std::size_t>(nz), [&](std::size_t kb, std::size_t ke) {
    for (int k = static_cast<int>(kb); k < static_cast<int>(ke); ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const std::size_t idx = spec.linear(i, j, k);
          if (!occupancy.is_air(idx)) {
            u.set(idx, {});
            continue;
          }
          const double gx = (i + 1 < nx ? P[idx + 1] : 0.0) - (i > 0 ? P[idx - 1] : 0.0);
          const double gy = (j + 1 < ny ? P[idx + sy] : 0.0) - (j > 0 ? P[idx - sy] : 0.0);
          const double gz = (k + 1 < nz ? P[idx + sz] : 0.0) - (k > 0 ? P[idx - sz] : 0.0);
          Vec3 v = u.at(idx) - Vec3{gx, gy, gz} * c;
          // No flow into solids; flow leaving them is unconstrained.
          if (i > 0 && v.x < 0 && occupancy.is_occupied(idx - 1)) v.x = 0;
          if (i + 1 < nx && v.x > 0 && occupancy.is_occupied(idx + 1)) v.x = 0;
          if (j > 0 && v.y < 0 && occupancy.is_occupied(idx - sy)) v.y = 0;
          if (j + 1 < ny && v.y > 0 && occupancy.is_occupied(idx + sy)) v.y = 0;
          if (k > 0 && v.z < 0 && occupancy.is_occupied(idx - sz)) v.z = 0;
          if (k + 1 < nz && v.z > 0 && occupancy.is_occupied(idx + sz)) v.z = 0;
          u.set(idx, v);
        }
  });

  report.div_after = max_divergence(u, occupancy);
  return report;
}

IgnitionReport ignite(FireState& state, ScalarField& T_m, const OccupancyGrid& occupancy,
                      std::span<const Index3> voxels, const CharParams& params) {
  const GridSpec& spec = occupancy.spec;
  for (const Index3& c : voxels)
    if (!spec.contains(c))
      throw InputError("ignition voxel (" + std::to_string(c.i) + "," + std::to_string(c.j) +
                       "," + std::to_string(c.k) + ") lies outside the grid");

  IgnitionReport report;
  for (const Index3& c : voxels) {
    const std::size_t idx = spec.linear(c);
    if (!occupancy.is_combustible(idx)) {
      report.skipped.push_back(c);
      continue;
    }
    T_m[idx] = static_cast<float>(params.T_burn);
    for (const Index3& off : kFaceOffsets) {
      const Index3 nb = c + off;
      if (spec.contains(nb) && occupancy.is_air(spec.linear(nb))) state.Y.at(nb) = 1.0f;
    }
    report.applied.push_back(c);
  }
  return report;
}

void source_fuel(FireState& state, const CharState& solid, const OccupancyGrid& occupancy,
                 const SolidProperties& props) {
  const GridSpec& spec = occupancy.spec;
  for (std::uint32_t idx : props.solid_cells) {
    if (!occupancy.is_combustible(idx)) continue;
    if (!(solid.T_m[idx] >= props.T_ign[idx]) || !(solid.M_c[idx] < 1.0f)) continue;
    const Index3 c = spec.unlinear(idx);
    for (const Index3& off : kFaceOffsets) {
      const Index3 nb = c + off;
      if (spec.contains(nb) && occupancy.is_air(spec.linear(nb))) state.Y.at(nb) = 1.0f;
    }
  }
}

StepDiagnostics fire_step(FireState& state, const CharState& solid,
                          const OccupancyGrid& occupancy, const SolidProperties& props,
                          const SimParams& params) {
  const GridSpec& spec = occupancy.spec;
  require(state.u.spec() == spec && state.Y.spec() == spec && solid.T_m.spec() == spec,
          "fire_step: grid mismatch");
  StepDiagnostics diag;

  {
    FireState next(spec);
    const ScalarField* src[] = {&state.u.x, &state.u.y, &state.u.z, &state.Y};
    ScalarField* dst[] = {&next.u.x, &next.u.y, &next.u.z, &next.Y};
    advect_channels(state.u, params.dt, src, dst);
    state.u = std::move(next.u);
    state.Y = std::move(next.Y);
  }

  // Buoyancy reads the post-reaction Y; with the default curve, freshly
  // sourced gas (Y = 1) is at ambient and would otherwise never start to rise.
  react(state.Y, params.k, params.dt);
  apply_forces(state.u, state.Y, occupancy, params, params.dt);
  diag.projection = project(state.u, state.p, occupancy, params);
  if (params.fuel_source) source_fuel(state, solid, occupancy, props);

  for (std::size_t idx = 0; idx < spec.cell_count(); ++idx) {
    if (occupancy.is_occupied(idx)) {
      state.Y[idx] = 0.0f;
      state.u.set(idx, {});
    } else {
      state.Y[idx] = std::clamp(state.Y[idx], 0.0f, 1.0f);
    }
  }
  diag.max_speed = state.u.max_magnitude();
  diag.total_Y = state.Y.sum();
  return diag;
}

}  // namespace ember
