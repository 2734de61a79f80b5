#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace ember {

using Rgb = std::array<double, 3>;

// Combustion properties of one material class. Physical fields left unset
// fall back to the global CharParams values.
struct Material {
  std::string name;
  bool burnable = false;
  std::optional<double> beta;   // thermal diffusivity, m^2/s
  std::optional<double> eps_c;  // charring rate, 1/s
  std::optional<double> T_ign;  // ignition temperature, K
  Rgb smoke_color{0.5, 0.5, 0.5};

  friend bool operator==(const Material&, const Material&) = default;
};

class MaterialTable {
 public:
  // Throws InputError on duplicate ids or out-of-range physical fields.
  void add(std::uint32_t id, Material m);

  bool contains(std::uint32_t id) const { return entries_.contains(id); }
  const Material& at(std::uint32_t id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::uint32_t, Material>& entries() const { return entries_; }

  friend bool operator==(const MaterialTable&, const MaterialTable&) = default;

 private:
  std::map<std::uint32_t, Material> entries_;
};

}  // namespace ember
