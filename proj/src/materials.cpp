#include "ember/materials.hpp"

#include <cmath>

#include "ember/common.hpp"

namespace ember {

namespace {

void check_non_negative(const std::optional<double>& v, const char* field, std::uint32_t id) {
  if (v && !(*v >= 0.0 && std::isfinite(*v)))
    throw InputError("material " + std::to_string(id) + ": " + field + " must be >= 0");
}

}  // namespace

void MaterialTable::add(std::uint32_t id, Material m) {
  if (entries_.contains(id)) throw InputError("duplicate material id " + std::to_string(id));
  check_non_negative(m.beta, "beta", id);
  check_non_negative(m.eps_c, "eps_c", id);
  check_non_negative(m.T_ign, "T_ign", id);
  if (m.burnable && m.T_ign && !(*m.T_ign > 0.0))
    throw InputError("material " + std::to_string(id) + ": burnable entries need T_ign > 0");
  for (double c : m.smoke_color)
    if (!(c >= 0.0 && c <= 1.0))
      throw InputError("material " + std::to_string(id) + ": smoke_color must lie in [0,1]");
  entries_.emplace(id, std::move(m));
}

const Material& MaterialTable::at(std::uint32_t id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw InputError("unknown material id " + std::to_string(id));
  return it->second;
}

}  // namespace ember
