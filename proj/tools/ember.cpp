// ember: command-line front end for the combustion simulator and renderer.

#include <CLI11.hpp>

#include <algorithm>
#include <cstring>
#include <limits>
#include <map>
#include <iostream>
#include <string>
#include <vector>

#include "ember/demo.hpp"
#include "ember/parallel.hpp"
#include "ember/pipeline.hpp"
#include "ember/scene_io.hpp"

namespace {

using namespace ember;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

Index3 parse_index(const std::string& s) {
  Index3 c;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d,%d,%d%c", &c.i, &c.j, &c.k, &tail) != 3)
    throw InputError("--ignite expects i,j,k, got '" + s + "'");
  return c;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> ignite;
  std::vector<std::string> cameras;
  std::string out;
  int frames = 0;
  int threads = 0;

  RunConfig load() const {
    set_thread_limit(threads);
    RunConfig cfg = read_config(config, sets);
    if (!out.empty()) cfg.output_dir = fs::absolute(out);
    return cfg;
  }
  RunOptions options() const {
    RunOptions o;
    if (frames > 0) o.frames = frames;
    for (const std::string& s : ignite) o.ignite.push_back(parse_index(s));
    o.cameras = cameras;
    o.stats = &std::cout;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c, bool sim_flags, bool camera_flag) {
  cmd->add_option("config", c.config, "Run configuration file")->required();
  cmd->add_option("--set", c.sets, "Override a parameter: section.key=value (repeatable)");
  cmd->add_option("--threads", c.threads, "Worker thread cap (0 = all cores)");
  cmd->add_option("--out", c.out, "Output directory (replaces run.output_dir)");
  cmd->add_option("--frames", c.frames, "Number of frames (replaces run.frames)");
  if (sim_flags) cmd->add_option("--ignite", c.ignite, "Extra ignition voxel i,j,k (repeatable)");
  if (camera_flag) cmd->add_option("--camera", c.cameras, "Camera id (repeatable; default all)");
}

template <typename T>
void print_stats(std::ostream& out, const std::string& label, std::span<const T> v) {
  double lo = 0, hi = 0, sum = 0;
  std::size_t bad = 0;
  bool first = true;
  for (T x : v) {
    const double d = static_cast<double>(x);
    if (!std::isfinite(d)) {
      ++bad;
      continue;
    }
    if (first) lo = hi = d;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
    first = false;
  }
  const std::size_t n = v.size() - bad;
  out << label << " min=" << lo << " max=" << hi << " mean=" << (n ? sum / n : 0.0);
  if (bad) out << " non_finite=" << bad;
  out << "\n";
}

int probe(const std::string& file) {
  const fs::path path(file);
  const Bytes bytes = read_file(path);
  auto starts = [&](const char* m) {
    return bytes.size() >= std::strlen(m) && std::memcmp(bytes.data(), m, std::strlen(m)) == 0;
  };
  std::cout << "file=" << path.string() << " bytes=" << bytes.size() << "\n";
  if (starts("VGRD")) {
    const VgridData d = decode_vgrid(bytes);
    const GridSpec& s = d.spec;
    std::cout << "format=VGRD dims=" << s.nx() << "x" << s.ny() << "x" << s.nz()
              << " channels=" << d.channels.size() << " origin=" << s.origin().x << ","
              << s.origin().y << "," << s.origin().z << " spacing=" << s.spacing() << "\n";
    for (std::size_t c = 0; c < d.channels.size(); ++c)
      print_stats<float>(std::cout, "channel=" + std::to_string(c), d.channels[c].values());
  } else if (starts("PNTS")) {
    const auto pts = decode_points(bytes);
    std::cout << "format=PNTS count=" << pts.size() << "\n";
    std::vector<float> x, y, z, o;
    std::map<std::uint32_t, std::size_t> ids;
    for (const LabeledPoint& p : pts) {
      x.push_back(static_cast<float>(p.position.x));
      y.push_back(static_cast<float>(p.position.y));
      z.push_back(static_cast<float>(p.position.z));
      o.push_back(p.opacity);
      ++ids[p.material_id];
    }
    if (!pts.empty()) {
      print_stats<float>(std::cout, "x", x);
      print_stats<float>(std::cout, "y", y);
      print_stats<float>(std::cout, "z", z);
      print_stats<float>(std::cout, "opacity", o);
    }
    for (const auto& [id, n] : ids) std::cout << "material=" << id << " points=" << n << "\n";
  } else if (starts("FPLN")) {
    const FloatPlane p = decode_plane(bytes);
    std::cout << "format=FPLN size=" << p.width << "x" << p.height << " channels=" << p.channels
              << "\n";
    for (int c = 0; c < p.channels; ++c) {
      std::vector<float> ch;
      for (std::size_t i = c; i < p.data.size(); i += p.channels) ch.push_back(p.data[i]);
      print_stats<float>(std::cout, "channel=" + std::to_string(c), ch);
    }
  } else if (starts("P6")) {
    const Image8 img = decode_ppm(bytes);
    std::cout << "format=PPM size=" << img.width << "x" << img.height << "\n";
    print_stats<std::uint8_t>(std::cout, "value", img.rgb);
  } else {
    const std::string text(bytes.begin(), bytes.end());
    if (std::find(text.begin(), text.end(), '\0') != text.end())
      throw InputError("unknown format: not VGRD, PNTS, FPLN, P6 or a key=value document");
    const KvDocument doc = parse_kv(text, path.string());
    const bool any_material = std::any_of(doc.sections.begin(), doc.sections.end(), [](const KvSection& s) {
      return s.name.starts_with("material.");
    });
    if (doc.find("grid") || doc.find("scene")) {
      const RunConfig cfg = read_config(path);
      std::cout << "format=config\n" << format_config(cfg);
    } else if (any_material) {
      const MaterialTable t = read_materials(path);
      std::cout << "format=materials entries=" << t.size() << "\n" << format_materials(t);
    } else if (doc.sections.size() == 1 && doc.sections[0].name.empty()) {
      const Camera c = read_camera(path);
      std::cout << "format=camera\n" << format_camera(c);
    } else {
      throw InputError("unknown format: unrecognised key=value document");
    }
  }
  std::cout << "valid=true\n";
  return 0;
}

std::pair<int, int> parse_range(const std::string& s) {
  if (s.empty()) return {0, std::numeric_limits<int>::max()};
  int a = 0, b = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d:%d%c", &a, &b, &tail) == 2) return {a, b};
  if (std::sscanf(s.c_str(), "%d%c", &a, &tail) == 1) return {a, a};
  throw InputError("--range expects N or A:B, got '" + s + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"ember: voxel fire, smoke and charring simulation with spectral rendering"};
  app.require_subcommand(1);

  Common sim_args, render_args, run_args;
  auto* sim = app.add_subcommand("sim", "Simulate and write VGRD snapshots");
  add_common(sim, sim_args, true, false);

  auto* render = app.add_subcommand("render", "Render snapshots to PPM frames");
  add_common(render, render_args, false, true);
  std::string range;
  render->add_option("--range", range, "Snapshot frame N or range A:B (default all)");

  auto* pipeline = app.add_subcommand("run", "Simulate and render in one pass");
  add_common(pipeline, run_args, true, true);

  auto* demo = app.add_subcommand("demo", "Write the procedural box-on-plane scene");
  std::string demo_dir;
  DemoOptions demo_opts;
  demo->add_option("dir", demo_dir, "Output directory")->required();
  demo->add_option("--res", demo_opts.resolution, "Grid cells per axis");
  demo->add_option("--frames", demo_opts.frames, "Frames in the generated config");
  demo->add_option("--snapshot-every", demo_opts.snapshot_every, "Snapshot cadence");
  demo->add_option("--width", demo_opts.width, "Image width");
  demo->add_option("--height", demo_opts.height, "Image height");

  auto* probe_cmd = app.add_subcommand("probe", "Describe and validate a file");
  std::string probe_file;
  probe_cmd->add_option("file", probe_file, "VGRD, PNTS, FPLN, PPM, config, materials or camera")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (sim->parsed()) {
    const RunConfig cfg = sim_args.load();
    run_sim(cfg, sim_args.options());
    std::cout << "report=" << (cfg.output_dir / "sim_report.txt").string() << "\n";
  } else if (render->parsed()) {
    const auto [first, last] = parse_range(range);
    run_render(render_args.load(), render_args.options(), first, last);
  } else if (pipeline->parsed()) {
    run_pipeline(run_args.load(), run_args.options());
  } else if (demo->parsed()) {
    if (demo_opts.frames < 1 || demo_opts.snapshot_every < 1)
      throw InputError("demo: frames and snapshot cadence must be >= 1");
    const fs::path written = write_demo(demo_dir, demo_opts);
    std::cout << "config=" << written.string() << "\n";
  } else if (probe_cmd->parsed()) {
    return probe(probe_file);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
