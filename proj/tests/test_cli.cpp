#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>

#include "ember/demo.hpp"
#include "ember/scene_io.hpp"

#ifndef EMBER_BIN
#error "EMBER_BIN must name the ember executable"
#endif

using namespace ember;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(EMBER_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ember_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& rel = "") const { return (path / rel).string(); }
};

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

std::size_t positive_Y(const fs::path& snapshot) {
  std::size_t n = 0;
  const Snapshot s = read_snapshot(snapshot);
  for (float v : s.fire.Y.values()) n += v > 0.0f;
  return n;
}

// Pixel of a world point, or {-1, -1} behind the camera.
std::pair<int, int> project(const Camera& c, Vec3 p) {
  const auto& m = c.world_from_camera;
  const Vec3 d = p - c.position();
  // Inverse rotation: transpose of the 3x3 block.
  const double x = m[0] * d.x + m[4] * d.y + m[8] * d.z;
  const double y = m[1] * d.x + m[5] * d.y + m[9] * d.z;
  const double z = m[2] * d.x + m[6] * d.y + m[10] * d.z;
  if (z <= 0) return {-1, -1};
  return {static_cast<int>(std::floor(c.fx * x / z + c.cx)),
          static_cast<int>(std::floor(c.fy * y / z + c.cy))};
}

}  // namespace

TEST_CASE("demo, sim and render end to end, twice") {
  TempDir dir("e2e");
  const std::string cfg = dir.str("scene/demo.cfg");
  Result r = cli("demo " + dir.str("scene") + " --res 24 --width 48 --height 36 --frames 12 --snapshot-every 4");
  REQUIRE(r.code == 0);
  CHECK(contains(r.output, "config="));
  const MaterialTable mats = read_materials(dir.path / "scene/materials.txt");
  int burnable = 0;
  for (const auto& [id, m] : mats.entries()) burnable += m.burnable;
  CHECK(burnable == 1);

  for (const char* out : {"a", "b"}) {
    r = cli("sim " + cfg + " --out " + dir.str(out) + " --set sim.alpha=0.005");
    REQUIRE(r.code == 0);
    CHECK(contains(r.output, "frame=12 "));
    r = cli("render " + cfg + " --out " + dir.str(out));
    REQUIRE(r.code == 0);
  }
  const std::string report = read_text(dir.path / "a/sim_report.txt");
  CHECK(contains(report, "set = sim.alpha=0.005\n"));
  CHECK(contains(report, "frames = 12\n"));

  for (int f : {0, 4, 8, 12}) {
    const fs::path snap = snapshot_path(dir.path / "a", f);
    CHECK(read_file(snap) == read_file(snapshot_path(dir.path / "b", f)));
    for (const char* cam : {"front", "side"}) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d.ppm", f);
      const fs::path rel = fs::path("render") / cam / name;
      REQUIRE(fs::exists(dir.path / "a" / rel));
      CHECK(read_file(dir.path / "a" / rel) == read_file(dir.path / "b" / rel));
    }
  }

  SUBCASE("single camera and frame range") {
    r = cli("render " + cfg + " --out " + dir.str("c") + " --camera side --range 4:8");
    CHECK(r.code == 2);  // no snapshots in c yet
    fs::copy(dir.path / "a", dir.path / "c", fs::copy_options::recursive);
    fs::remove_all(dir.path / "c/render");
    r = cli("render " + cfg + " --out " + dir.str("c") + " --camera side --range 4:8");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir.path / "c/render/side/frame_0008.ppm"));
    CHECK_FALSE(fs::exists(dir.path / "c/render/side/frame_0012.ppm"));
    CHECK_FALSE(fs::exists(dir.path / "c/render/front"));
  }
  SUBCASE("missing snapshot names the frame") {
    fs::remove(snapshot_path(dir.path / "a", 8));
    r = cli("render " + cfg + " --out " + dir.str("a"));
    CHECK(r.code == 2);
    CHECK(contains(r.output, "frame 8"));
  }
  SUBCASE("unknown camera") {
    r = cli("render " + cfg + " --out " + dir.str("a") + " --camera top");
    CHECK(r.code == 2);
    CHECK(contains(r.output, "top"));
  }
}

TEST_CASE("lower reaction rate leaves more burning gas") {
  TempDir dir("k");
  const std::string cfg = dir.str("demo.cfg");
  REQUIRE(cli("demo " + dir.str() + " --width 16 --height 12 --frames 30 --snapshot-every 30").code == 0);
  REQUIRE(cli("sim " + cfg + " --out " + dir.str("base")).code == 0);
  REQUIRE(cli("sim " + cfg + " --out " + dir.str("khalf") + " --set sim.k=0.5").code == 0);
  const std::size_t base = positive_Y(snapshot_path(dir.path / "base", 30));
  CHECK(base > 0);
  CHECK(positive_Y(snapshot_path(dir.path / "khalf", 30)) > base);
  CHECK(contains(read_text(dir.path / "khalf/sim_report.txt"), "set = sim.k=0.5\n"));

  // With k = 0 fuel stays at Y = 1, which the default curve maps to T_air:
  // no buoyancy, so the gas never moves.
  REQUIRE(cli("sim " + cfg + " --out " + dir.str("k0") + " --set sim.k=0").code == 0);
  const Snapshot still = read_snapshot(snapshot_path(dir.path / "k0", 30));
  for (const ScalarField* c : {&still.fire.u.x, &still.fire.u.y, &still.fire.u.z}) {
    CHECK(c->max_value() == 0.0f);
    CHECK(c->min_value() == 0.0f);
  }
}

TEST_CASE("the pipeline shows fire above the ignition column at frame 60") {
  TempDir dir("fire");
  REQUIRE(cli("demo " + dir.str()).code == 0);
  const Result r = cli("run " + dir.str("demo.cfg") + " --camera front");
  REQUIRE(r.code == 0);
  CHECK(contains(read_text(dir.path / "out/run_report.txt"), "command = run"));

  const RunConfig cfg = read_config(dir.path / "demo.cfg");
  const Camera cam = read_camera(cfg.camera("front").file);
  const Image8 before = read_ppm(dir.path / "out/render/front/frame_0000.ppm");
  const Image8 after = read_ppm(dir.path / "out/render/front/frame_0060.ppm");
  REQUIRE(after.width == cam.width);

  // Air column outside the ignited -x face, from the ignition cell to the top.
  const Index3 ig = cfg.ignite.at(0);
  const GridSpec& g = cfg.grid;
  const auto [u0, v0] = project(cam, g.center_of({ig.i - 1, ig.j, ig.k}));
  const auto [u1, v1] = project(cam, g.center_of({ig.i - 1, ig.j, g.nz() - 1}));
  REQUIRE(v1 < v0);
  const int margin = 4;
  std::size_t changed = 0, brighter = 0;
  for (int v = std::max(0, v1); v <= std::min(cam.height - 1, v0); ++v)
    for (int u = std::max(0, std::min(u0, u1) - margin);
         u <= std::min(cam.width - 1, std::max(u0, u1) + margin); ++u) {
      const std::size_t px = (static_cast<std::size_t>(v) * cam.width + u) * 3;
      int delta = 0;
      for (int c = 0; c < 3; ++c) delta += after.rgb[px + c] - before.rgb[px + c];
      changed += delta != 0;
      brighter += delta > 15;
    }
  CHECK(changed > 0);
  CHECK(brighter > 0);
}

TEST_CASE("probe") {
  TempDir dir("probe");
  REQUIRE(cli("demo " + dir.str() + " --res 16 --width 8 --height 6 --frames 2 --snapshot-every 1").code == 0);
  REQUIRE(cli("sim " + dir.str("demo.cfg")).code == 0);
  const fs::path snap = snapshot_path(dir.path / "out", 2);

  Result r = cli("probe " + snap.string());
  CHECK(r.code == 0);
  CHECK(contains(r.output, "format=VGRD dims=16x16x16 channels=7"));
  CHECK(contains(r.output, "channel=3 min="));
  CHECK(contains(r.output, "valid=true"));

  Bytes bytes = read_file(snap);
  bytes.resize(bytes.size() - 10);
  write_file(dir.path / "cut.vgrd", bytes);
  r = cli("probe " + dir.str("cut.vgrd"));
  CHECK(r.code == 2);
  CHECK(contains(r.output, "byte offset"));

  r = cli("probe " + dir.str("demo.cfg"));
  CHECK(r.code == 0);
  CHECK(contains(r.output, "format=config"));
  CHECK(contains(r.output, "projection_iters = "));
  CHECK(contains(r.output, "eps_c = "));
  CHECK(contains(r.output, "max_lights = "));

  CHECK(contains(cli("probe " + dir.str("points.pnts")).output, "format=PNTS"));
  CHECK(contains(cli("probe " + dir.str("materials.txt")).output, "format=materials entries=2"));
  CHECK(contains(cli("probe " + dir.str("camera_front.txt")).output, "format=camera"));
  CHECK(contains(cli("probe " + dir.str("gbuffer_side.depth.fpln")).output, "format=FPLN"));
  CHECK(contains(cli("probe " + dir.str("gbuffer_side.color.ppm")).output, "format=PPM"));

  write_file(dir.path / "junk.bin", Bytes{0, 1, 2, 3});
  CHECK(cli("probe " + dir.str("junk.bin")).code == 2);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  REQUIRE(cli("demo " + dir.str() + " --res 16 --width 8 --height 6 --frames 1").code == 0);
  const std::string cfg = dir.str("demo.cfg");
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 2);
  CHECK(cli("fly " + cfg).code == 2);
  CHECK(cli("sim " + dir.str("missing.cfg")).code == 2);
  Result r = cli("sim " + cfg + " --set sim.alhpa=1");
  CHECK(r.code == 2);
  CHECK(contains(r.output, "alhpa"));
  CHECK(cli("sim " + cfg + " --set render.r_dark=0").code == 2);
  CHECK(cli("sim " + cfg + " --ignite 1,2").code == 2);
  r = cli("sim " + cfg + " --ignite 0,0,0");
  CHECK(r.code == 0);
  CHECK(contains(read_text(dir.path / "out/sim_report.txt"), "ignite_skipped = 0,0,0"));
  CHECK(cli("render " + cfg + " --range x").code == 2);
  // Resource exhaustion is not an input problem.
  CHECK(cli("demo " + dir.str("huge") + " --res 6000 --width 4 --height 4").code == 3);
}
