#include "ember/char_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ember/parallel.hpp"

namespace ember {

void CharParams::validate() const {
  auto fail = [](const char* msg) { throw InputError(std::string("char params: ") + msg); };
  if (!(beta >= 0)) fail("beta must be >= 0");
  if (!(gamma_m >= 0)) fail("gamma_m must be >= 0");
  if (!(eps_c >= 0)) fail("eps_c must be >= 0");
  if (!(T_amb > 0)) fail("T_amb must be > 0");
  if (!(T_ign > T_amb)) fail("T_ign must exceed T_amb");
  if (!(T_burn >= T_ign)) fail("T_burn must be >= T_ign");
  if (substeps < 1) fail("substeps must be >= 1");
}

SolidProperties resolve_solid_properties(const OccupancyGrid& occupancy,
                                         const MaterialTable& materials,
                                         const CharParams& params) {
  params.validate();
  const std::size_t n = occupancy.spec.cell_count();
  SolidProperties props;
  props.spec = occupancy.spec;
  props.beta.assign(n, 0.0f);
  props.eps_c.assign(n, 0.0f);
  props.T_ign.assign(n, std::numeric_limits<float>::infinity());

  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!occupancy.is_occupied(idx)) continue;
    props.solid_cells.push_back(static_cast<std::uint32_t>(idx));
    const Material& m = materials.at(static_cast<std::uint32_t>(occupancy.material[idx]));
    const double beta = m.beta.value_or(params.beta);
    props.beta[idx] = static_cast<float>(beta);
    props.beta_max = std::max(props.beta_max, static_cast<double>(props.beta[idx]));
    if (occupancy.is_combustible(idx)) {
      const double t_ign = m.T_ign.value_or(params.T_ign);
      if (t_ign > params.T_burn)
        throw InputError("material '" + m.name + "' ignites above T_burn");
      props.eps_c[idx] = static_cast<float>(m.eps_c.value_or(params.eps_c));
      props.T_ign[idx] = static_cast<float>(t_ign);
    }
  }
  return props;
}

int heat_substeps(const SolidProperties& props, const CharParams& params, double dt) {
  const double h = props.spec.spacing();
  const double ratio = dt * 6.0 * props.beta_max / (h * h) / 0.9;
  const double needed = std::ceil(ratio);
  return std::max(params.substeps, static_cast<int>(needed));
}

namespace {

double face_conductance(float a, float b) {
  if (a <= 0.0f || b <= 0.0f) return 0.0;
  return 2.0 * static_cast<double>(a) * b / (static_cast<double>(a) + b);
}

}  // namespace

int heat_step(CharState& state, const SolidProperties& props, const CharParams& params,
              double dt) {
  require(state.T_m.spec() == props.spec, "heat_step: grid mismatch");
  const int substeps = heat_substeps(props, params, dt);
  const double dt_sub = dt / substeps;
  const GridSpec& spec = props.spec;
  const double inv_h2 = 1.0 / (spec.spacing() * spec.spacing());
  const double t_amb4 = std::pow(params.T_amb, 4);
  const std::span<const std::uint32_t> cells = props.solid_cells;
  std::vector<float> next(cells.size());
  std::span<float> T = state.T_m.values();

  for (int s = 0; s < substeps; ++s) {
    parallel_for(cells.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) {
        const std::size_t idx = cells[n];
        const Index3 c = spec.unlinear(idx);
        const double t = T[idx];
        double flux = 0.0;
        if (props.beta[idx] > 0.0f) {
          for (const Index3& off : kFaceOffsets) {
            const Index3 nb = c + off;
            if (!spec.contains(nb)) continue;
            const std::size_t nidx = spec.linear(nb);
            const double k = face_conductance(props.beta[idx], props.beta[nidx]);
            if (k > 0.0) flux += k * (T[nidx] - t);
          }
        }
        const double t2 = t * t;
        const double dT = flux * inv_h2 + params.gamma_m * (t_amb4 - t2 * t2);
        next[n] = static_cast<float>(t + dt_sub * dT);
      }
    });
    const auto t_burn = static_cast<float>(params.T_burn);
    for (std::size_t n = 0; n < cells.size(); ++n) {
      const std::size_t idx = cells[n];
      float v = next[n];
      if (v >= props.T_ign[idx]) v = t_burn;
      T[idx] = v;
    }
  }
  return substeps;
}

int heat_step(CharState& state, const OccupancyGrid& occupancy, const MaterialTable& materials,
              const CharParams& params, double dt) {
  return heat_step(state, resolve_solid_properties(occupancy, materials, params), params, dt);
}

void char_update(CharState& state, const SolidProperties& props, double dt) {
  require(state.M_c.spec() == props.spec, "char_update: grid mismatch");
  std::span<float> M = state.M_c.values();
  std::span<const float> T = state.T_m.values();
  for (std::uint32_t idx : props.solid_cells) {
    if (props.eps_c[idx] <= 0.0f || !(T[idx] >= props.T_ign[idx])) continue;
    const double m = M[idx] + static_cast<double>(props.eps_c[idx]) * dt;
    M[idx] = static_cast<float>(std::min(m, 1.0));
  }
}

void char_update(CharState& state, const OccupancyGrid& occupancy, const MaterialTable& materials,
                 const CharParams& params, double dt) {
  char_update(state, resolve_solid_properties(occupancy, materials, params), dt);
}

float char_at(Vec3 position, const ScalarField& M_c, const OccupancyGrid& occupancy) {
  const GridSpec& spec = M_c.spec();
  if (!is_finite(position)) return 0.0f;
  const Index3 c = spec.index_of(position);
  if (!spec.contains(c)) return 0.0f;
  const std::size_t idx = spec.linear(c);
  return occupancy.is_combustible(idx) ? M_c[idx] : 0.0f;
}

std::vector<float> gaussian_char_lookup(std::span<const Vec3> positions, const ScalarField& M_c,
                                        const OccupancyGrid& occupancy) {
  std::vector<float> out;
  out.reserve(positions.size());
  for (const Vec3& p : positions) out.push_back(char_at(p, M_c, occupancy));
  return out;
}

}  // namespace ember
