#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ember/grid.hpp"
#include "ember/materials.hpp"

namespace ember {

struct CharParams {
  double beta = 1e-4;       // fallback thermal diffusivity, m^2/s
  double gamma_m = 1e-11;   // radiative cooling coefficient, 1/(s K^3)
  double T_amb = 300.0;     // K
  double T_ign = 550.0;     // fallback ignition threshold, K
  double T_burn = 1100.0;   // burning clamp temperature, K
  double eps_c = 0.05;      // fallback charring rate, 1/s
  int substeps = 1;         // lower bound; raised to meet the stability limit

  // Throws InputError when an invariant does not hold.
  void validate() const;
};

struct CharState {
  ScalarField T_m;  // K; T_amb on air cells
  ScalarField M_c;  // relative char mass in [0,1]

  CharState() = default;
  CharState(const GridSpec& spec, double T_amb)
      : T_m(spec, static_cast<float>(T_amb)), M_c(spec, 0.0f) {}
};

// Per-cell material properties resolved against the fallbacks in CharParams,
// plus the list of occupied cells the solid-phase kernels iterate over.
struct SolidProperties {
  GridSpec spec;
  std::vector<float> beta;   // 0 on air cells
  std::vector<float> eps_c;  // 0 on non-combustible cells
  std::vector<float> T_ign;  // +inf on non-combustible cells
  std::vector<std::uint32_t> solid_cells;
  double beta_max = 0.0;
};

// Throws InputError if a burnable material's ignition threshold exceeds
// T_burn, which would make the clamp extinguish the cell it ignites.
SolidProperties resolve_solid_properties(const OccupancyGrid& occupancy,
                                         const MaterialTable& materials,
                                         const CharParams& params);

// Number of explicit substeps used for a step of length dt.
int heat_substeps(const SolidProperties& props, const CharParams& params, double dt);

// Explicit conduction + radiative cooling on occupied cells with the burning
// clamp applied after every substep. Returns the substep count used.
int heat_step(CharState& state, const SolidProperties& props, const CharParams& params,
              double dt);
int heat_step(CharState& state, const OccupancyGrid& occupancy, const MaterialTable& materials,
              const CharParams& params, double dt);

// M_c += eps_c * dt while T_m >= T_ign, saturating at 1 (combustible cells only).
void char_update(CharState& state, const SolidProperties& props, double dt);
void char_update(CharState& state, const OccupancyGrid& occupancy, const MaterialTable& materials,
                 const CharParams& params, double dt);

// Char mass inherited by points from their containing voxel; 0 outside the
// grid or in non-combustible cells.
std::vector<float> gaussian_char_lookup(std::span<const Vec3> positions, const ScalarField& M_c,
                                        const OccupancyGrid& occupancy);
float char_at(Vec3 position, const ScalarField& M_c, const OccupancyGrid& occupancy);

}  // namespace ember
