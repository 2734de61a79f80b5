#include "ember/demo.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ember/scene_io.hpp"

namespace ember {

namespace {

struct Box {
  Vec3 lo, hi;
};

// Slab test returning the entry distance and the face normal hit.
bool hit_box(const Ray& ray, const Box& box, double& t_hit, Vec3& normal) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  int axis = -1;
  double sign = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (ray.dir[a] == 0.0) {
      if (ray.origin[a] < box.lo[a] || ray.origin[a] > box.hi[a]) return false;
      continue;
    }
    double ta = (box.lo[a] - ray.origin[a]) / ray.dir[a];
    double tb = (box.hi[a] - ray.origin[a]) / ray.dir[a];
    double s = -1.0;
    if (ta > tb) {
      std::swap(ta, tb);
      s = 1.0;
    }
    if (ta > t0) {
      t0 = ta;
      axis = a;
      sign = s;
    }
    t1 = std::min(t1, tb);
  }
  if (axis < 0 || t0 > t1) return false;
  t_hit = t0;
  normal = Vec3{};
  normal[axis] = sign;
  return true;
}

Camera look_at(int width, int height, double fov_x_deg, Vec3 eye, Vec3 target) {
  Camera c;
  c.width = width;
  c.height = height;
  c.fx = c.fy = 0.5 * width / std::tan(0.5 * fov_x_deg * 3.14159265358979323846 / 180.0);
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  const Vec3 fwd = normalize(target - eye);
  const Vec3 right = normalize(cross(fwd, Vec3{0, 0, 1}));
  const Vec3 down = cross(fwd, right);
  // Columns of the rotation block are the camera axes in world space.
  c.world_from_camera = {right.x, down.x, fwd.x, eye.x, right.y, down.y, fwd.y, eye.y,
                         right.z, down.z, fwd.z, eye.z, 0, 0, 0, 1};
  return c;
}

GBuffer render_gbuffer(const Camera& cam, double ground_z, const Box& box) {
  const Vec3 sun = normalize(Vec3{0.4, -0.5, 0.8});
  const LinearRGB sky{0.55, 0.7, 0.9};
  const LinearRGB ground_albedo{0.35, 0.33, 0.3};
  const LinearRGB wood_albedo{0.55, 0.36, 0.2};
  constexpr double ambient = 0.25;

  GBuffer g(cam.width, cam.height);
  for (int j = 0; j < cam.height; ++j)
    for (int i = 0; i < cam.width; ++i) {
      const std::size_t px = static_cast<std::size_t>(j) * cam.width + i;
      const Ray ray = generate_ray(cam, i, j);
      double t = std::numeric_limits<double>::infinity();
      Vec3 n{0, 0, 1};
      LinearRGB albedo = sky;
      if (ray.dir.z < 0.0) {
        const double tg = (ground_z - ray.origin.z) / ray.dir.z;
        if (tg > 0.0) {
          t = tg;
          albedo = ground_albedo;
        }
      }
      double tb;
      Vec3 nb;
      if (hit_box(ray, box, tb, nb) && tb < t) {
        t = tb;
        n = nb;
        albedo = wood_albedo;
      }
      if (std::isfinite(t)) {
        g.color[px] = albedo * (ambient + (1.0 - ambient) * std::max(0.0, dot(n, sun)));
        g.depth[px] = static_cast<float>(t);
        g.normal[px] = n;
      } else {
        g.color[px] = sky;
      }
    }
  return g;
}

}  // namespace

Material demo_wood() {
  Material m;
  m.name = "wood";
  m.burnable = true;
  m.beta = 8e-4;
  m.eps_c = 0.05;
  m.T_ign = 550.0;
  m.smoke_color = {0.92, 0.92, 0.92};
  return m;
}

Material demo_stone() {
  Material m;
  m.name = "stone";
  m.burnable = false;
  m.beta = 1e-5;
  m.smoke_color = {0.3, 0.3, 0.3};
  return m;
}

DemoScene make_demo_scene(const DemoOptions& options) {
  const int n = options.resolution;
  if (n < 16) throw InputError("demo: resolution must be at least 16");
  if (options.width < 1 || options.height < 1) throw InputError("demo: bad image size");
  const double h = 1.0 / n;

  DemoScene s;
  s.grid = GridSpec(n, n, n, Vec3{-0.5, -0.5, 0.0}, h);
  s.materials.add(kStoneId, demo_stone());
  s.materials.add(kWoodId, demo_wood());

  s.ground_layers = std::max(1, n / 32);
  const int half = std::max(2, static_cast<int>(std::lround(0.15 * n)));
  const int height = std::max(2, static_cast<int>(std::lround(0.25 * n)));
  s.box_lo = {n / 2 - half, n / 2 - half, s.ground_layers};
  s.box_hi = {n / 2 + half - 1, n / 2 + half - 1, s.ground_layers + height - 1};
  s.ignition = {s.box_lo.i, n / 2, s.box_lo.k};

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const bool ground = k < s.ground_layers;
        const bool box = i >= s.box_lo.i && i <= s.box_hi.i && j >= s.box_lo.j &&
                         j <= s.box_hi.j && k >= s.box_lo.k && k <= s.box_hi.k;
        if (!ground && !box) continue;
        s.points.push_back({s.grid.center_of({i, j, k}), 0.9f, ground ? kStoneId : kWoodId});
      }

  // Faint floaters a reconstruction would leave behind; all below threshold.
  std::mt19937 rng(20240611u);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 8) * (1.0 / 16777216.0); };
  const std::size_t noise = s.points.size() / 20;
  for (std::size_t m = 0; m < noise; ++m) {
    const Vec3 p{-0.5 + uniform(), -0.5 + uniform(), uniform()};
    s.points.push_back({p, static_cast<float>(0.2 * uniform()), (rng() & 1u) ? kWoodId : kStoneId});
  }

  const Vec3 lo = s.grid.center_of(s.box_lo) - Vec3{0.5 * h, 0.5 * h, 0.5 * h};
  const Vec3 hi = s.grid.center_of(s.box_hi) + Vec3{0.5 * h, 0.5 * h, 0.5 * h};
  const Box box{lo, hi};
  const double ground_z = s.ground_layers * h;
  const Vec3 target{0.0, 0.0, 0.3};
  const Camera front = look_at(options.width, options.height, 60.0, {0.0, -1.6, 0.55}, target);
  const Camera side = look_at(options.width, options.height, 60.0, {-1.5, -0.6, 0.7}, target);
  s.cameras.push_back({"front", front, render_gbuffer(front, ground_z, box)});
  s.cameras.push_back({"side", side, render_gbuffer(side, ground_z, box)});
  return s;
}

fs::path write_demo(const fs::path& dir, const DemoOptions& options) {
  const DemoScene s = make_demo_scene(options);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("demo: cannot create " + dir.string());

  write_points(dir / "points.pnts", s.points);
  write_text(dir / "materials.txt", format_materials(s.materials));

  RunConfig cfg;
  cfg.grid = s.grid;
  cfg.points = "points.pnts";
  cfg.materials = "materials.txt";
  cfg.opacity_threshold = 0.5;
  cfg.frames = options.frames;
  cfg.snapshot_every = options.snapshot_every;
  cfg.output_dir = "out";
  cfg.ignite = {s.ignition};
  for (const DemoCamera& c : s.cameras) {
    write_text(dir / ("camera_" + c.id + ".txt"), format_camera(c.camera));
    write_gbuffer(dir / ("gbuffer_" + c.id), c.gbuffer);
    cfg.cameras.push_back({c.id, "camera_" + c.id + ".txt", "gbuffer_" + c.id});
  }
  const fs::path path = dir / "demo.cfg";
  write_text(path, "# Procedural demo scene: wooden box on a stone ground plane.\n" +
                       format_config(cfg));
  return path;
}

}  // namespace ember
