#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ember/char_sim.hpp"
#include "ember/fire_sim.hpp"
#include "ember/grid.hpp"
#include "ember/materials.hpp"
#include "ember/renderer.hpp"

namespace ember {

namespace fs = std::filesystem;

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const fs::path& path);
void write_file(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

// ---- VGRD ----------------------------------------------------------------

inline constexpr std::size_t kVgridHeaderSize = 40;

struct VgridData {
  GridSpec spec;
  std::vector<ScalarField> channels;
};

// All channels must share one spec and hold finite values.
Bytes encode_vgrid(std::span<const ScalarField* const> channels);
VgridData decode_vgrid(std::span<const std::uint8_t> bytes);
void write_vgrid(const fs::path& path, std::span<const ScalarField* const> channels);
void write_vgrid(const fs::path& path, const ScalarField& field);
VgridData read_vgrid(const fs::path& path);

// ---- PNTS ----------------------------------------------------------------

inline constexpr std::size_t kPointsHeaderSize = 16;
inline constexpr std::size_t kPointRecordSize = 20;

Bytes encode_points(std::span<const LabeledPoint> points);
std::vector<LabeledPoint> decode_points(std::span<const std::uint8_t> bytes);
void write_points(const fs::path& path, std::span<const LabeledPoint> points);
std::vector<LabeledPoint> read_points(const fs::path& path);

// ---- FPLN ----------------------------------------------------------------

inline constexpr std::size_t kPlaneHeaderSize = 20;

struct FloatPlane {
  int width = 0, height = 0, channels = 0;
  std::vector<float> data;  // row-major, channels interleaved

  friend bool operator==(const FloatPlane&, const FloatPlane&) = default;
};

Bytes encode_plane(const FloatPlane& plane);
FloatPlane decode_plane(std::span<const std::uint8_t> bytes);
void write_plane(const fs::path& path, const FloatPlane& plane);
FloatPlane read_plane(const fs::path& path);

// ---- PPM (P6, maxval 255) ------------------------------------------------

Bytes encode_ppm(const Image8& image);
Image8 decode_ppm(std::span<const std::uint8_t> bytes);
void write_ppm(const fs::path& path, const Image8& image);
Image8 read_ppm(const fs::path& path);

// ---- G-buffer ------------------------------------------------------------

// Writes <stem>.color.ppm (sRGB encoded), <stem>.depth.fpln, <stem>.normal.fpln.
void write_gbuffer(const fs::path& stem, const GBuffer& gbuffer);
// Positions are left empty; call derive_positions with the matching camera.
GBuffer read_gbuffer(const fs::path& stem);
fs::path gbuffer_plane_path(const fs::path& stem, std::string_view plane);

// ---- key = value documents -----------------------------------------------

struct KvEntry {
  std::string key, value;
  int line = 0;
};

struct KvSection {
  std::string name;  // empty for keys before the first header
  int line = 0;
  std::vector<KvEntry> entries;
};

struct KvDocument {
  std::vector<KvSection> sections;

  const KvSection* find(std::string_view name) const;
};

// Throws InputError ("<source>:<line>: ...") on malformed lines and on
// duplicated keys or sections.
KvDocument parse_kv(std::string_view text, std::string_view source = "<text>");

MaterialTable parse_materials(std::string_view text, std::string_view source = "<text>");
MaterialTable read_materials(const fs::path& path);
std::string format_materials(const MaterialTable& table);

Camera parse_camera(std::string_view text, std::string_view source = "<text>");
Camera read_camera(const fs::path& path);
std::string format_camera(const Camera& camera);

struct CameraEntry {
  std::string id;
  fs::path file;
  fs::path gbuffer;  // stem
};

struct RunConfig {
  fs::path source;  // the config file itself
  GridSpec grid;
  fs::path points;
  fs::path materials;
  double opacity_threshold = 0.5;
  std::vector<CameraEntry> cameras;
  SimParams sim;
  CharParams charring;
  RenderParams render;
  std::vector<Index3> ignite;
  int frames = 60;
  int snapshot_every = 1;
  fs::path output_dir = "out";
  // `section.key=value` overrides, kept verbatim for the run report.
  std::vector<std::string> overrides;

  const CameraEntry& camera(std::string_view id) const;
};

// Parses a config, applies overrides on top of the file, validates every
// parameter block and resolves relative paths against the config directory.
// Every referenced input file must exist.
RunConfig parse_config(std::string_view text, const fs::path& base_dir,
                       std::span<const std::string> overrides = {},
                       std::string_view source = "<text>");
RunConfig read_config(const fs::path& path, std::span<const std::string> overrides = {});
// A complete document with every parameter, defaults included.
std::string format_config(const RunConfig& config);

// ---- simulation snapshots ------------------------------------------------

// Channel order: ux, uy, uz, Y, p, T_m, M_c.
inline constexpr int kSnapshotChannels = 7;

struct Snapshot {
  FireState fire;
  CharState solid;
};

fs::path snapshot_path(const fs::path& dir, int frame);
void write_snapshot(const fs::path& path, const FireState& fire, const CharState& solid);
Snapshot read_snapshot(const fs::path& path);

}  // namespace ember
