#pragma once

#include <span>
#include <vector>

#include "ember/char_sim.hpp"
#include "ember/grid.hpp"

namespace ember {

// T(Y) = T_air + (T_max - T_air) * (c0 + c1 Y + c2 Y^2).
struct TemperatureCurve {
  double c0 = 0.0, c1 = 4.0, c2 = -4.0;

  double operator()(double Y) const { return c0 + Y * (c1 + Y * c2); }
};

struct SimParams {
  double dt = 1.0 / 30.0;    // s
  double k = 1.0;            // reaction rate, 1/s
  double alpha = 0.004;      // buoyancy, m/s^2 per K
  double T_air = 300.0;      // K
  double T_max = 1800.0;     // K
  double eps_vort = 2.0;     // vorticity confinement strength
  Vec3 wind{};               // uniform body acceleration, m/s^2
  double rho = 1.0;          // kg/m^3
  int projection_iters = 60;
  double projection_tol = 1e-4;
  // Over-relaxation factor for the Gauss-Seidel sweeps; 0 picks the
  // optimum for the grid size, 1 gives plain Gauss-Seidel.
  double sor_omega = 0.0;
  TemperatureCurve curve{};
  bool fuel_source = true;

  // Throws InputError when an invariant does not hold.
  void validate() const;
};

struct FireState {
  VectorField u;  // m/s
  ScalarField Y;  // reaction coordinate in [0,1]
  ScalarField p;  // pressure from the last projection

  FireState() = default;
  explicit FireState(const GridSpec& spec) : u(spec), Y(spec), p(spec) {}
};

struct ProjectionReport {
  int iterations = 0;
  double residual = 0.0;     // max |Ap - b| / max |b| at exit
  double div_before = 0.0;   // max cell divergence over interior air cells, 1/s
  double div_after = 0.0;
};

struct StepDiagnostics {
  ProjectionReport projection;
  double max_speed = 0.0;
  double total_Y = 0.0;
};

struct IgnitionReport {
  std::vector<Index3> applied;
  std::vector<Index3> skipped;  // not combustible
};

// Semi-Lagrangian transport: value at x becomes field(x - u(x) dt).
ScalarField advect(const ScalarField& field, const VectorField& u, double dt);
VectorField advect(const VectorField& field, const VectorField& u, double dt);

double temperature_from_Y(double Y, const SimParams& params);
ScalarField temperature_from_Y(const ScalarField& Y, const SimParams& params);

// Buoyancy + vorticity confinement + wind, integrated over dt. Cells that are
// occupied receive no force.
void apply_forces(VectorField& u, const ScalarField& Y, const OccupancyGrid& occupancy,
                  const SimParams& params, double dt);

// Confinement force alone (exposed for verification).
VectorField vorticity_confinement(const VectorField& u, double eps, double h);

void react(ScalarField& Y, double k, double dt);

// Central-difference divergence at interior cells; 0 elsewhere.
ScalarField divergence(const VectorField& u);
// Max |div u| over interior air cells.
double max_divergence(const VectorField& u, const OccupancyGrid& occupancy);

ProjectionReport project(VectorField& u, ScalarField& p, const OccupancyGrid& occupancy,
                         const SimParams& params);

// Throws InputError if any index lies outside the grid; nothing is modified
// in that case.
IgnitionReport ignite(FireState& state, ScalarField& T_m, const OccupancyGrid& occupancy,
                      std::span<const Index3> voxels, const CharParams& params);

void source_fuel(FireState& state, const CharState& solid, const OccupancyGrid& occupancy,
                 const SolidProperties& props);

// One operator-split step: advect, react, forces, project, fuel source.
StepDiagnostics fire_step(FireState& state, const CharState& solid,
                          const OccupancyGrid& occupancy, const SolidProperties& props,
                          const SimParams& params);

}  // namespace ember
