#include "ember/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "ember/spectral.hpp"

namespace ember {

namespace {

// ---- little-endian byte helpers -------------------------------------------

class ByteWriter {
 public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void magic(const char (&m)[5]) { out_.insert(out_.end(), m, m + 4); }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

 private:
  Bytes& out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, const char* format)
      : bytes_(bytes), format_(format) {}

  std::size_t offset() const { return off_; }
  std::size_t size() const { return bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - off_ < n)
      fail(std::string("truncated ") + what + ": expected " + std::to_string(off_ + n) +
               " bytes, got " + std::to_string(bytes_.size()),
           bytes_.size());
  }
  void magic(const char (&m)[5]) {
    need(4, "magic");
    if (std::memcmp(bytes_.data(), m, 4) != 0) fail(std::string("bad magic, expected ") + m, 0);
    off_ += 4;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<std::uint32_t>(bytes_[off_ + s]) << (8 * s);
    off_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int s = 0; s < 8; ++s) v |= static_cast<std::uint64_t>(bytes_[off_ + s]) << (8 * s);
    off_ += 8;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  void version(std::uint32_t expected) {
    const std::size_t at = off_;
    const std::uint32_t v = u32("version");
    if (v != expected)
      fail("unsupported version " + std::to_string(v) + " (expected " +
               std::to_string(expected) + ")",
           at);
  }
  // The remaining payload must be exactly `n` bytes.
  void expect_payload(std::uint64_t n, const char* what) const {
    const std::uint64_t have = bytes_.size() - off_;
    if (have != n)
      fail(std::string(have < n ? "truncated " : "trailing bytes after ") + what +
               ": expected " + std::to_string(off_ + n) + " bytes, got " +
               std::to_string(bytes_.size()),
           have < n ? bytes_.size() : off_ + n);
  }

  [[noreturn]] void fail(const std::string& msg, std::uint64_t at) const {
    throw FormatError(std::string(format_) + ": " + msg + " (byte offset " +
                          std::to_string(at) + ")",
                      at);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  const char* format_;
  std::size_t off_ = 0;
};

// a * b * ... without wrapping; false on overflow.
bool checked_product(std::initializer_list<std::uint64_t> factors, std::uint64_t& out) {
  std::uint64_t acc = 1;
  for (std::uint64_t f : factors)
    if (__builtin_mul_overflow(acc, f, &acc)) return false;
  out = acc;
  return true;
}

// ---- text helpers ---------------------------------------------------------

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("expected a number, got '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw InputError("value must be finite");
  return v;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("expected an integer, got '" + std::string(s) + "'");
  return v;
}

int parse_int32(std::string_view s) {
  const long long v = parse_int(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw InputError("integer out of range: " + std::string(s));
  return static_cast<int>(v);
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw InputError("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> parse_list(std::string_view s, std::size_t count) {
  const auto parts = split(s, ',');
  if (parts.size() != count)
    throw InputError("expected " + std::to_string(count) + " comma-separated numbers, got " +
                     std::to_string(parts.size()));
  std::vector<double> v;
  for (auto p : parts) v.push_back(parse_double(p));
  return v;
}

Vec3 parse_vec3(std::string_view s) {
  const auto v = parse_list(s, 3);
  return {v[0], v[1], v[2]};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(Vec3 v) { return fmt(v.x) + ", " + fmt(v.y) + ", " + fmt(v.z); }

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string located(std::string_view source, int line, const std::string& msg) {
  return std::string(source) + ":" + std::to_string(line) + ": " + msg;
}

}  // namespace

// ---- files ---------------------------------------------------------------

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

// ---- VGRD ----------------------------------------------------------------

Bytes encode_vgrid(std::span<const ScalarField* const> channels) {
  require(!channels.empty(), "encode_vgrid: no channels");
  const GridSpec& spec = channels.front()->spec();
  for (const ScalarField* c : channels) {
    require(c->spec() == spec, "encode_vgrid: channels differ in grid spec");
    if (!c->all_finite()) throw InputError("VGRD: refusing to write non-finite values");
  }
  Bytes out;
  out.reserve(kVgridHeaderSize + channels.size() * spec.cell_count() * 4);
  ByteWriter w(out);
  w.magic("VGRD");
  w.u32(1);
  for (int a = 0; a < 3; ++a) w.u32(static_cast<std::uint32_t>(spec.dim(a)));
  w.u32(static_cast<std::uint32_t>(channels.size()));
  for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(spec.origin()[a]));
  w.f32(static_cast<float>(spec.spacing()));
  for (const ScalarField* c : channels)
    for (float v : c->values()) w.f32(v);
  return out;
}

VgridData decode_vgrid(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "VGRD");
  r.magic("VGRD");
  r.version(1);
  std::array<std::uint32_t, 3> n{};
  for (int a = 0; a < 3; ++a) {
    const std::size_t at = r.offset();
    n[a] = r.u32("dims");
    if (n[a] < 2 || n[a] > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
      r.fail("dimension " + std::to_string(n[a]) + " out of range", at);
  }
  const std::size_t channels_at = r.offset();
  const std::uint32_t channels = r.u32("channel count");
  if (channels == 0) r.fail("channel count is zero", channels_at);
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = r.f32("origin");
  const std::size_t spacing_at = r.offset();
  const float h = r.f32("spacing");
  for (int a = 0; a < 3; ++a)
    if (!std::isfinite(origin[a])) r.fail("non-finite origin", 20);
  if (!(h > 0.0f) || !std::isfinite(h)) r.fail("spacing must be positive", spacing_at);

  std::uint64_t payload = 0;
  if (!checked_product({n[0], n[1], n[2], channels, 4}, payload) ||
      payload > std::numeric_limits<std::size_t>::max() - kVgridHeaderSize)
    r.fail("dimension overflow", 8);
  r.expect_payload(payload, "payload");

  VgridData out{GridSpec(static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2]),
                         origin, h),
                {}};
  out.channels.reserve(channels);
  for (std::uint32_t c = 0; c < channels; ++c) {
    ScalarField f(out.spec);
    for (float& v : f.storage()) v = r.f32("payload");
    out.channels.push_back(std::move(f));
  }
  return out;
}

void write_vgrid(const fs::path& path, std::span<const ScalarField* const> channels) {
  write_file(path, encode_vgrid(channels));
}

void write_vgrid(const fs::path& path, const ScalarField& field) {
  const ScalarField* one[] = {&field};
  write_vgrid(path, one);
}

VgridData read_vgrid(const fs::path& path) { return decode_vgrid(read_file(path)); }

// ---- PNTS ----------------------------------------------------------------

Bytes encode_points(std::span<const LabeledPoint> points) {
  Bytes out;
  out.reserve(kPointsHeaderSize + points.size() * kPointRecordSize);
  ByteWriter w(out);
  w.magic("PNTS");
  w.u32(1);
  w.u64(points.size());
  for (const LabeledPoint& p : points) {
    w.f32(static_cast<float>(p.position.x));
    w.f32(static_cast<float>(p.position.y));
    w.f32(static_cast<float>(p.position.z));
    w.f32(p.opacity);
    w.u32(p.material_id);
  }
  return out;
}

std::vector<LabeledPoint> decode_points(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "PNTS");
  r.magic("PNTS");
  r.version(1);
  const std::uint64_t count = r.u64("point count");
  std::uint64_t payload = 0;
  if (!checked_product({count, kPointRecordSize}, payload)) r.fail("point count overflow", 8);
  r.expect_payload(payload, "point records");
  std::vector<LabeledPoint> points(count);
  for (LabeledPoint& p : points) {
    p.position.x = r.f32("x");
    p.position.y = r.f32("y");
    p.position.z = r.f32("z");
    p.opacity = r.f32("opacity");
    p.material_id = r.u32("material id");
  }
  return points;
}

void write_points(const fs::path& path, std::span<const LabeledPoint> points) {
  write_file(path, encode_points(points));
}

std::vector<LabeledPoint> read_points(const fs::path& path) {
  return decode_points(read_file(path));
}

// ---- FPLN ----------------------------------------------------------------

Bytes encode_plane(const FloatPlane& plane) {
  require(plane.width > 0 && plane.height > 0 && plane.channels > 0, "encode_plane: empty plane");
  require(plane.data.size() ==
              static_cast<std::size_t>(plane.width) * plane.height * plane.channels,
          "encode_plane: data size does not match dimensions");
  Bytes out;
  out.reserve(kPlaneHeaderSize + plane.data.size() * 4);
  ByteWriter w(out);
  w.magic("FPLN");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(plane.width));
  w.u32(static_cast<std::uint32_t>(plane.height));
  w.u32(static_cast<std::uint32_t>(plane.channels));
  for (float v : plane.data) w.f32(v);
  return out;
}

FloatPlane decode_plane(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "FPLN");
  r.magic("FPLN");
  r.version(1);
  const std::uint32_t w = r.u32("width"), h = r.u32("height"), c = r.u32("channel count");
  const auto max_int = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (w == 0 || h == 0 || w > max_int || h > max_int) r.fail("bad image size", 8);
  if (c == 0 || c > 64) r.fail("bad channel count " + std::to_string(c), 16);
  std::uint64_t payload = 0;
  if (!checked_product({w, h, c, 4}, payload)) r.fail("dimension overflow", 8);
  r.expect_payload(payload, "pixel data");
  FloatPlane plane{static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), {}};
  plane.data.resize(static_cast<std::size_t>(w) * h * c);
  for (float& v : plane.data) v = r.f32("pixel data");
  return plane;
}

void write_plane(const fs::path& path, const FloatPlane& plane) {
  write_file(path, encode_plane(plane));
}

FloatPlane read_plane(const fs::path& path) { return decode_plane(read_file(path)); }

// ---- PPM -----------------------------------------------------------------

Bytes encode_ppm(const Image8& image) {
  require(image.width > 0 && image.height > 0 &&
              image.rgb.size() == static_cast<std::size_t>(image.width) * image.height * 3,
          "encode_ppm: bad image");
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

Image8 decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw FormatError("PPM: " + msg + " (byte offset " + std::to_string(pos) + ")", pos);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail("bad magic, expected P6");
  pos = 2;
  auto next_number = [&]() -> long long {
    // Whitespace and '#' comments may separate header fields.
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail("malformed header");
    long long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1LL << 31)) fail("header value too large");
      ++pos;
    }
    return v;
  };
  const long long w = next_number(), h = next_number(), maxval = next_number();
  if (w <= 0 || h <= 0) fail("bad image size");
  if (maxval != 255) fail("only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail("malformed header");
  ++pos;
  const std::uint64_t expected = static_cast<std::uint64_t>(w) * h * 3;
  if (bytes.size() - pos != expected) {
    const std::size_t have = bytes.size() - pos;
    pos = bytes.size();
    fail(std::string(have < expected ? "truncated" : "trailing bytes after") +
         " pixel data: expected " + std::to_string(expected) + " bytes, got " +
         std::to_string(have));
  }
  Image8 img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

void write_ppm(const fs::path& path, const Image8& image) { write_file(path, encode_ppm(image)); }

Image8 read_ppm(const fs::path& path) { return decode_ppm(read_file(path)); }

// ---- G-buffer ------------------------------------------------------------

fs::path gbuffer_plane_path(const fs::path& stem, std::string_view plane) {
  fs::path p = stem;
  p += ".";
  p += std::string(plane);
  return p;
}

void write_gbuffer(const fs::path& stem, const GBuffer& g) {
  const std::size_t n = g.pixel_count();
  Image8 color{g.width, g.height, std::vector<std::uint8_t>(n * 3)};
  FloatPlane depth{g.width, g.height, 1, std::vector<float>(g.depth.begin(), g.depth.end())};
  FloatPlane normal{g.width, g.height, 3, std::vector<float>(n * 3)};
  for (std::size_t px = 0; px < n; ++px) {
    const LinearRGB c = g.color[px];
    color.rgb[px * 3 + 0] = quantize(srgb_encode(c.r));
    color.rgb[px * 3 + 1] = quantize(srgb_encode(c.g));
    color.rgb[px * 3 + 2] = quantize(srgb_encode(c.b));
    for (int a = 0; a < 3; ++a) normal.data[px * 3 + a] = static_cast<float>(g.normal[px][a]);
  }
  write_ppm(gbuffer_plane_path(stem, "color.ppm"), color);
  write_plane(gbuffer_plane_path(stem, "depth.fpln"), depth);
  write_plane(gbuffer_plane_path(stem, "normal.fpln"), normal);
}

GBuffer read_gbuffer(const fs::path& stem) {
  const fs::path color_path = gbuffer_plane_path(stem, "color.ppm");
  const fs::path depth_path = gbuffer_plane_path(stem, "depth.fpln");
  const fs::path normal_path = gbuffer_plane_path(stem, "normal.fpln");
  const Image8 color = read_ppm(color_path);
  const FloatPlane depth = read_plane(depth_path);
  const FloatPlane normal = read_plane(normal_path);

  auto size_of = [](int w, int h) { return std::to_string(w) + "x" + std::to_string(h); };
  auto check = [&](const FloatPlane& p, const fs::path& path, int channels) {
    if (p.width != color.width || p.height != color.height)
      throw InputError("gbuffer size mismatch: " + color_path.string() + " is " +
                       size_of(color.width, color.height) + " but " + path.string() + " is " +
                       size_of(p.width, p.height));
    if (p.channels != channels)
      throw InputError(path.string() + ": expected " + std::to_string(channels) +
                       " channel(s), got " + std::to_string(p.channels));
  };
  check(depth, depth_path, 1);
  check(normal, normal_path, 3);

  GBuffer g(color.width, color.height);
  for (std::size_t px = 0; px < g.pixel_count(); ++px) {
    g.color[px] = {srgb_decode(color.rgb[px * 3] / 255.0), srgb_decode(color.rgb[px * 3 + 1] / 255.0),
                   srgb_decode(color.rgb[px * 3 + 2] / 255.0)};
    const float d = depth.data[px];
    if (!(d > 0.0f))
      throw InputError(depth_path.string() + ": invalid depth at pixel " + std::to_string(px));
    g.depth[px] = d;
    const Vec3 n{normal.data[px * 3], normal.data[px * 3 + 1], normal.data[px * 3 + 2]};
    const double len = length(n);
    g.normal[px] = len > 0.0 && std::isfinite(len) ? n / len : Vec3{0, 0, 1};
  }
  g.position.clear();
  return g;
}

// ---- key = value ----------------------------------------------------------

const KvSection* KvDocument::find(std::string_view name) const {
  for (const KvSection& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

KvDocument parse_kv(std::string_view text, std::string_view source) {
  KvDocument doc;
  std::map<std::string, int> section_lines;
  std::map<std::string, int> key_lines;  // within the current section
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(located(source, line_no, "unterminated section header"));
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw InputError(located(source, line_no, "empty section name"));
      if (auto it = section_lines.find(name); it != section_lines.end())
        throw InputError(located(source, line_no,
                                 "duplicate section [" + name + "] (first at line " +
                                     std::to_string(it->second) + ")"));
      section_lines[name] = line_no;
      doc.sections.push_back({name, line_no, {}});
      key_lines.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InputError(located(source, line_no, "expected 'key = value'"));
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw InputError(located(source, line_no, "missing key"));
    if (doc.sections.empty()) doc.sections.push_back({"", 0, {}});
    if (auto it = key_lines.find(key); it != key_lines.end())
      throw InputError(located(source, line_no,
                               "duplicate key '" + key + "' (first at line " +
                                   std::to_string(it->second) + ")"));
    key_lines[key] = line_no;
    doc.sections.back().entries.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
  }
  return doc;
}

// ---- materials --------------------------------------------------------------

MaterialTable parse_materials(std::string_view text, std::string_view source) {
  const KvDocument doc = parse_kv(text, source);
  MaterialTable table;
  for (const KvSection& s : doc.sections) {
    constexpr std::string_view prefix = "material.";
    if (!s.name.starts_with(prefix))
      throw InputError(located(source, s.line,
                               s.name.empty() ? "keys must appear inside a [material.<id>] section"
                                              : "unknown section [" + s.name + "]"));
    long long id = 0;
    try {
      id = parse_int(std::string_view(s.name).substr(prefix.size()));
    } catch (const InputError&) {
      throw InputError(located(source, s.line, "material id must be an integer"));
    }
    if (id < 0 || id > std::numeric_limits<std::int32_t>::max())
      throw InputError(located(source, s.line, "material id out of range"));

    Material m;
    bool has_name = false, has_burnable = false;
    for (const KvEntry& e : s.entries) {
      try {
        if (e.key == "name") {
          m.name = e.value;
          has_name = true;
        } else if (e.key == "burnable") {
          m.burnable = parse_bool(e.value);
          has_burnable = true;
        } else if (e.key == "beta") {
          m.beta = parse_double(e.value);
        } else if (e.key == "eps_c") {
          m.eps_c = parse_double(e.value);
        } else if (e.key == "T_ign") {
          m.T_ign = parse_double(e.value);
        } else if (e.key == "smoke_color") {
          const Vec3 c = parse_vec3(e.value);
          m.smoke_color = {c.x, c.y, c.z};
        } else {
          throw InputError("unknown key '" + e.key + "'");
        }
      } catch (const InputError& err) {
        throw InputError(located(source, e.line, err.what()));
      }
    }
    if (!has_name) throw InputError(located(source, s.line, "missing required key 'name'"));
    if (!has_burnable) throw InputError(located(source, s.line, "missing required key 'burnable'"));
    if (m.burnable && m.T_ign && !(*m.T_ign > 0))
      throw InputError(located(source, s.line, "T_ign must be > 0 for a burnable material"));
    try {
      table.add(static_cast<std::uint32_t>(id), m);
    } catch (const InputError& err) {
      throw InputError(located(source, s.line, err.what()));
    }
  }
  return table;
}

MaterialTable read_materials(const fs::path& path) {
  return parse_materials(read_text(path), path.string());
}

std::string format_materials(const MaterialTable& table) {
  std::ostringstream out;
  for (const auto& [id, m] : table.entries()) {
    out << "[material." << id << "]\n";
    out << "name = " << m.name << "\n";
    out << "burnable = " << fmt_bool(m.burnable) << "\n";
    if (m.beta) out << "beta = " << fmt(*m.beta) << "\n";
    if (m.eps_c) out << "eps_c = " << fmt(*m.eps_c) << "\n";
    if (m.T_ign) out << "T_ign = " << fmt(*m.T_ign) << "\n";
    out << "smoke_color = " << fmt(Vec3{m.smoke_color[0], m.smoke_color[1], m.smoke_color[2]})
        << "\n\n";
  }
  return out.str();
}

// ---- cameras ----------------------------------------------------------------

Camera parse_camera(std::string_view text, std::string_view source) {
  const KvDocument doc = parse_kv(text, source);
  Camera cam;
  std::map<std::string, bool> seen{{"width", false}, {"height", false}, {"fx", false},
                                   {"fy", false},    {"cx", false},     {"cy", false},
                                   {"world_from_camera", false}};
  for (const KvSection& s : doc.sections) {
    if (!s.name.empty())
      throw InputError(located(source, s.line, "camera files take no sections"));
    for (const KvEntry& e : s.entries) {
      try {
        if (e.key == "width") cam.width = parse_int32(e.value);
        else if (e.key == "height") cam.height = parse_int32(e.value);
        else if (e.key == "fx") cam.fx = parse_double(e.value);
        else if (e.key == "fy") cam.fy = parse_double(e.value);
        else if (e.key == "cx") cam.cx = parse_double(e.value);
        else if (e.key == "cy") cam.cy = parse_double(e.value);
        else if (e.key == "world_from_camera") {
          const auto v = parse_list(e.value, 16);
          std::copy(v.begin(), v.end(), cam.world_from_camera.begin());
        } else {
          throw InputError("unknown key '" + e.key + "'");
        }
      } catch (const InputError& err) {
        throw InputError(located(source, e.line, err.what()));
      }
      seen[e.key] = true;
    }
  }
  for (const auto& [key, present] : seen)
    if (!present) throw InputError(std::string(source) + ": missing required key '" + key + "'");
  try {
    cam.validate(1e-4);
  } catch (const InputError& err) {
    throw InputError(std::string(source) + ": " + err.what());
  }
  return cam;
}

Camera read_camera(const fs::path& path) { return parse_camera(read_text(path), path.string()); }

std::string format_camera(const Camera& c) {
  std::ostringstream out;
  out << "width = " << c.width << "\nheight = " << c.height << "\nfx = " << fmt(c.fx)
      << "\nfy = " << fmt(c.fy) << "\ncx = " << fmt(c.cx) << "\ncy = " << fmt(c.cy)
      << "\nworld_from_camera = ";
  for (std::size_t n = 0; n < 16; ++n) out << (n ? ", " : "") << fmt(c.world_from_camera[n]);
  out << "\n";
  return out.str();
}

// ---- run config -------------------------------------------------------------

const CameraEntry& RunConfig::camera(std::string_view id) const {
  for (const CameraEntry& c : cameras)
    if (c.id == id) return c;
  throw InputError("unknown camera '" + std::string(id) + "'");
}

namespace {

struct Binding {
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};
using Bindings = std::vector<std::pair<std::string, Binding>>;

Binding bind(double& v) {
  return {[&v](std::string_view s) { v = parse_double(s); }, [&v] { return fmt(v); }};
}
Binding bind(int& v) {
  return {[&v](std::string_view s) { v = parse_int32(s); }, [&v] { return std::to_string(v); }};
}
Binding bind(bool& v) {
  return {[&v](std::string_view s) { v = parse_bool(s); }, [&v] { return fmt_bool(v); }};
}
Binding bind(Vec3& v) {
  return {[&v](std::string_view s) { v = parse_vec3(s); }, [&v] { return fmt(v); }};
}
Binding bind(fs::path& v) {
  return {[&v](std::string_view s) {
            if (s.empty()) throw InputError("empty path");
            v = fs::path(std::string(s));
          },
          [&v] { return v.string(); }};
}

struct GridDraft {
  std::array<int, 3> dims{0, 0, 0};
  Vec3 origin{};
  double spacing = 0.0;
};

std::vector<Index3> parse_ignite(std::string_view s) {
  std::vector<Index3> out;
  if (trim(s).empty()) return out;
  for (auto item : split(s, ';')) {
    if (item.empty()) continue;
    const auto parts = split(item, ',');
    if (parts.size() != 3) throw InputError("ignition voxel must be 'i,j,k'");
    out.push_back({parse_int32(parts[0]), parse_int32(parts[1]), parse_int32(parts[2])});
  }
  return out;
}

std::string format_ignite(const std::vector<Index3>& v) {
  std::string s;
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (n) s += "; ";
    s += std::to_string(v[n].i) + "," + std::to_string(v[n].j) + "," + std::to_string(v[n].k);
  }
  return s;
}

std::map<std::string, Bindings> section_bindings(RunConfig& c, GridDraft& g) {
  std::map<std::string, Bindings> b;
  b["grid"] = {
      {"dims",
       {[&g](std::string_view s) {
          const auto parts = split(s, ',');
          if (parts.size() != 3) throw InputError("dims must be 'nx, ny, nz'");
          for (int a = 0; a < 3; ++a) g.dims[a] = parse_int32(parts[a]);
        },
        [&g] {
          return std::to_string(g.dims[0]) + ", " + std::to_string(g.dims[1]) + ", " +
                 std::to_string(g.dims[2]);
        }}},
      {"origin", bind(g.origin)},
      {"spacing", bind(g.spacing)},
  };
  b["scene"] = {{"points", bind(c.points)},
                {"materials", bind(c.materials)},
                {"opacity_threshold", bind(c.opacity_threshold)}};
  b["run"] = {{"frames", bind(c.frames)},
              {"snapshot_every", bind(c.snapshot_every)},
              {"output_dir", bind(c.output_dir)},
              {"ignite",
               {[&c](std::string_view s) { c.ignite = parse_ignite(s); },
                [&c] { return format_ignite(c.ignite); }}}};
  SimParams& s = c.sim;
  b["sim"] = {{"dt", bind(s.dt)},
              {"k", bind(s.k)},
              {"alpha", bind(s.alpha)},
              {"T_air", bind(s.T_air)},
              {"T_max", bind(s.T_max)},
              {"eps_vort", bind(s.eps_vort)},
              {"wind", bind(s.wind)},
              {"rho", bind(s.rho)},
              {"projection_iters", bind(s.projection_iters)},
              {"projection_tol", bind(s.projection_tol)},
              {"sor_omega", bind(s.sor_omega)},
              {"curve",
               {[&s](std::string_view v) {
                  const auto q = parse_list(v, 3);
                  s.curve = {q[0], q[1], q[2]};
                },
                [&s] { return fmt(Vec3{s.curve.c0, s.curve.c1, s.curve.c2}); }}},
              {"fuel_source", bind(s.fuel_source)}};
  CharParams& ch = c.charring;
  b["char"] = {{"beta", bind(ch.beta)},   {"gamma_m", bind(ch.gamma_m)},
               {"T_amb", bind(ch.T_amb)}, {"T_ign", bind(ch.T_ign)},
               {"T_burn", bind(ch.T_burn)}, {"eps_c", bind(ch.eps_c)},
               {"substeps", bind(ch.substeps)}};
  RenderParams& r = c.render;
  b["render"] = {{"sigma_a", bind(r.sigma_a)},
                 {"Y_smoke", bind(r.Y_smoke)},
                 {"sigma_s_smoke", bind(r.sigma_s_smoke)},
                 {"smoke_ambient", bind(r.smoke_ambient)},
                 {"M_c_dark", bind(r.M_c_dark)},
                 {"r_dark", bind(r.r_dark)},
                 {"k_d", bind(r.k_d)},
                 {"k_s", bind(r.k_s)},
                 {"shininess", bind(r.shininess)},
                 {"T_light", bind(r.T_light)},
                 {"max_lights", bind(r.max_lights)},
                 {"n_coarse", bind(r.n_coarse)},
                 {"n_fine", bind(r.n_fine)},
                 {"exposure", bind(r.exposure)},
                 {"fire_gain", bind(r.fire_gain)},
                 {"phong_falloff", bind(r.phong_falloff)},
                 {"adaptation_min_T", bind(r.adaptation_min_T)}};
  return b;
}

Bindings camera_bindings(CameraEntry& cam) {
  return {{"file", bind(cam.file)}, {"gbuffer", bind(cam.gbuffer)}};
}

const Binding* find_binding(const Bindings& b, std::string_view key) {
  for (const auto& [k, v] : b)
    if (k == key) return &v;
  return nullptr;
}

// Where a value came from, for error messages.
struct Origin {
  std::string where;
};

struct Assignment {
  std::string key, value;
  Origin origin;
};

struct MergedSection {
  std::string name;
  std::vector<Assignment> entries;
};

void require_file(const fs::path& p, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec))
    throw InputError("missing file " + p.string() + " (referenced by " + what + ")");
}

}  // namespace

RunConfig parse_config(std::string_view text, const fs::path& base_dir,
                       std::span<const std::string> overrides, std::string_view source) {
  const KvDocument doc = parse_kv(text, source);

  std::vector<MergedSection> merged;
  auto section = [&merged](const std::string& name) -> MergedSection& {
    for (MergedSection& s : merged)
      if (s.name == name) return s;
    merged.push_back({name, {}});
    return merged.back();
  };
  for (const KvSection& s : doc.sections) {
    if (s.name.empty() && !s.entries.empty())
      throw InputError(located(source, s.entries.front().line, "key outside of any section"));
    MergedSection& m = section(s.name);
    for (const KvEntry& e : s.entries)
      m.entries.push_back({e.key, e.value, {located(source, e.line, "")}});
  }
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    const std::string lhs = eq == std::string::npos ? "" : std::string(trim(std::string_view(ov).substr(0, eq)));
    const auto dot = lhs.rfind('.');
    if (eq == std::string::npos || dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
      throw InputError("--set " + ov + ": expected section.key=value");
    const std::string sec = lhs.substr(0, dot), key = lhs.substr(dot + 1);
    const std::string value(trim(std::string_view(ov).substr(eq + 1)));
    MergedSection& m = section(sec);
    auto it = std::find_if(m.entries.begin(), m.entries.end(),
                           [&](const Assignment& a) { return a.key == key; });
    Assignment a{key, value, {"--set " + ov + ": "}};
    if (it != m.entries.end()) *it = a;
    else m.entries.push_back(a);
  }

  RunConfig cfg;
  cfg.source = fs::path(std::string(source));
  cfg.overrides.assign(overrides.begin(), overrides.end());
  GridDraft grid;
  auto bindings = section_bindings(cfg, grid);
  std::map<std::string, bool> seen;

  auto assign = [&](const Binding& b, const Assignment& a) {
    try {
      b.set(a.value);
    } catch (const InputError& err) {
      throw InputError(a.origin.where + a.key + ": " + err.what());
    }
  };

  for (const MergedSection& s : merged) {
    if (s.name.starts_with("camera.")) {
      const std::string id = s.name.substr(7);
      if (id.empty()) throw InputError(std::string(source) + ": empty camera id");
      cfg.cameras.push_back({id, {}, {}});
      CameraEntry& cam = cfg.cameras.back();
      const Bindings cb = camera_bindings(cam);
      for (const Assignment& a : s.entries) {
        const Binding* b = find_binding(cb, a.key);
        if (!b) throw InputError(a.origin.where + "unknown key '" + a.key + "' in [" + s.name + "]");
        assign(*b, a);
      }
      if (cam.file.empty() || cam.gbuffer.empty())
        throw InputError(std::string(source) + ": [" + s.name + "] needs both 'file' and 'gbuffer'");
      continue;
    }
    auto it = bindings.find(s.name);
    if (it == bindings.end()) {
      const std::string where =
          s.entries.empty() ? std::string(source) + ": " : s.entries.front().origin.where;
      throw InputError(where + "unknown section [" + s.name + "]");
    }
    for (const Assignment& a : s.entries) {
      const Binding* b = find_binding(it->second, a.key);
      if (!b) throw InputError(a.origin.where + "unknown key '" + a.key + "' in [" + s.name + "]");
      assign(*b, a);
      seen[s.name + "." + a.key] = true;
    }
  }

  for (const char* key : {"grid.dims", "grid.spacing", "scene.points", "scene.materials"})
    if (!seen[key]) throw InputError(std::string(source) + ": missing required key '" + key + "'");

  for (int a = 0; a < 3; ++a)
    if (grid.dims[a] < 2) throw InputError(std::string(source) + ": grid.dims must all be >= 2");
  if (!(grid.spacing > 0)) throw InputError(std::string(source) + ": grid.spacing must be > 0");
  cfg.grid = GridSpec(grid.dims[0], grid.dims[1], grid.dims[2], grid.origin, grid.spacing);

  if (cfg.frames < 1) throw InputError(std::string(source) + ": run.frames must be >= 1");
  if (cfg.snapshot_every < 1)
    throw InputError(std::string(source) + ": run.snapshot_every must be >= 1");
  if (!(cfg.opacity_threshold >= 0 && cfg.opacity_threshold <= 1))
    throw InputError(std::string(source) + ": scene.opacity_threshold must lie in [0,1]");
  for (const Index3& v : cfg.ignite)
    if (!cfg.grid.contains(v))
      throw InputError(std::string(source) + ": ignition voxel " + std::to_string(v.i) + "," +
                       std::to_string(v.j) + "," + std::to_string(v.k) + " is outside the grid");
  cfg.sim.validate();
  cfg.charring.validate();
  cfg.render.validate();

  auto resolve = [&base_dir](fs::path& p) {
    if (p.is_relative()) p = base_dir / p;
  };
  resolve(cfg.points);
  resolve(cfg.materials);
  resolve(cfg.output_dir);
  require_file(cfg.points, "scene.points");
  require_file(cfg.materials, "scene.materials");
  for (CameraEntry& cam : cfg.cameras) {
    resolve(cam.file);
    resolve(cam.gbuffer);
    const std::string what = "[camera." + cam.id + "]";
    require_file(cam.file, what + " file");
    for (const char* plane : {"color.ppm", "depth.fpln", "normal.fpln"})
      require_file(gbuffer_plane_path(cam.gbuffer, plane), what + " gbuffer");
  }
  return cfg;
}

RunConfig read_config(const fs::path& path, std::span<const std::string> overrides) {
  return parse_config(read_text(path), fs::absolute(path).parent_path(), overrides,
                      path.string());
}

std::string format_config(const RunConfig& config) {
  RunConfig copy = config;
  GridDraft grid{config.grid.dims(), config.grid.origin(), config.grid.spacing()};
  auto bindings = section_bindings(copy, grid);
  std::ostringstream out;
  for (const char* name : {"grid", "scene", "run", "sim", "char", "render"}) {
    out << "[" << name << "]\n";
    for (const auto& [key, b] : bindings.at(name)) out << key << " = " << b.get() << "\n";
    out << "\n";
  }
  for (CameraEntry cam : copy.cameras) {
    out << "[camera." << cam.id << "]\n";
    for (const auto& [key, b] : camera_bindings(cam)) out << key << " = " << b.get() << "\n";
    out << "\n";
  }
  return out.str();
}

// ---- snapshots ----------------------------------------------------------------

fs::path snapshot_path(const fs::path& dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04d.vgrd", frame);
  return dir / name;
}

void write_snapshot(const fs::path& path, const FireState& fire, const CharState& solid) {
  const ScalarField* channels[kSnapshotChannels] = {&fire.u.x, &fire.u.y, &fire.u.z, &fire.Y,
                                                    &fire.p,   &solid.T_m, &solid.M_c};
  write_vgrid(path, channels);
}

Snapshot read_snapshot(const fs::path& path) {
  VgridData d = read_vgrid(path);
  if (d.channels.size() != kSnapshotChannels)
    throw InputError(path.string() + ": expected " + std::to_string(kSnapshotChannels) +
                     " channels, got " + std::to_string(d.channels.size()));
  Snapshot s;
  s.fire.u.x = std::move(d.channels[0]);
  s.fire.u.y = std::move(d.channels[1]);
  s.fire.u.z = std::move(d.channels[2]);
  s.fire.Y = std::move(d.channels[3]);
  s.fire.p = std::move(d.channels[4]);
  s.solid.T_m = std::move(d.channels[5]);
  s.solid.M_c = std::move(d.channels[6]);
  return s;
}

}  // namespace ember
