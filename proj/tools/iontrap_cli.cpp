#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "iontrap/config.hpp"
#include "iontrap/error.hpp"
#include "iontrap/mathieu.hpp"
#include "iontrap/pipeline.hpp"
#include "iontrap/report.hpp"
#include "iontrap/scenario.hpp"

namespace fs = std::filesystem;
using namespace iontrap;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, solver_error = 3, ion_lost = 4 };

std::mutex out_mutex;

void say(std::ostream& os, const std::string& text) {
  std::lock_guard lock(out_mutex);
  os << text << std::flush;
}

// Output directory: --output beats IONTRAP_OUTPUT_DIR beats ./iontrap_out.
fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("IONTRAP_OUTPUT_DIR"); env && *env) return env;
  return "iontrap_out";
}

template <class F>
int guarded(const std::string& context, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    say(std::cerr, context + ": config error: " + e.what() + "\n");
    return config_error;
  } catch (const GeometryError& e) {
    say(std::cerr, context + ": geometry error: " + e.what() + "\n");
    return config_error;
  } catch (const SolverError& e) {
    say(std::cerr, context + ": solver error: " + e.what() + "\n");
    return solver_error;
  } catch (const std::exception& e) {
    say(std::cerr, context + ": error: " + e.what() + "\n");
    return failure;
  }
}

std::string mhz(const std::optional<double>& f) {
  if (!f) return "n/a";
  std::ostringstream s;
  s.precision(6);
  s << *f * 1e-6 << " MHz";
  return s.str();
}

int run_one(const fs::path& cfg, const RunOptions& base, bool verbose) {
  return guarded(cfg.string(), [&] {
    const Scenario sc = Scenario::load(cfg);
    RunOptions o = base;
    if (verbose) o.log = &std::cerr;
    const Report rep = run_scenario(sc, o);
    std::ostringstream line;
    line << sc.name << ": radial " << mhz(rep.radial_frequency) << ", axial " << mhz(rep.axial_frequency);
    if (rep.lost) line << ", ION LOST at " << rep.lost_time << " s";
    line << '\n';
    say(std::cout, line.str());
    for (const auto& f : rep.files) say(std::cout, "  wrote " + f + "\n");
    return rep.lost ? ion_lost : ok;
  });
}

struct Range {
  double lo = 0.0, hi = 0.0;
  int n = 0;
};

// "lo:hi:n"
Range parse_range(const std::string& text) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.n) || c1 != ':' || c2 != ':' || r.n < 1 || !(in >> std::ws).eof()) {
    throw ConfigError("range '" + text + "' must look like lo:hi:n");
  }
  return r;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigError("'" + tok + "' is not an integer");
    }
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path);
  if (!(os << text)) throw Error("cannot write '" + path + "'");
  std::cout << "wrote " << path << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ion trap field, trajectory and secular-frequency simulator"};
  app.require_subcommand(1);
  std::string output;
  app.add_option("-o,--output", output, "Output directory (overrides IONTRAP_OUTPUT_DIR)");

  // run
  auto* run = app.add_subcommand("run", "Run scenarios and write reports");
  std::vector<std::string> run_files;
  std::string all_dir;
  std::string duration_text;
  bool verbose = false;
  int jobs = 0;
  run->add_option("scenario", run_files, "Scenario files");
  run->add_option("--all", all_dir, "Run every *.cfg in this directory")->expected(0, 1)->default_str("scenarios");
  run->add_option("--duration", duration_text, "Override the simulated duration, e.g. \"0.25 ms\"");
  run->add_option("-j,--jobs", jobs, "Parallel scenarios for --all (default: hardware threads)");
  run->add_flag("-v,--verbose", verbose, "Log pipeline stages to stderr");

  // map
  auto* map = app.add_subcommand("map", "Export a potential map CSV");
  std::string map_file, plane = "zx", offset_text = "0 m", half_text;
  int points = 201;
  map->add_option("scenario", map_file, "Scenario file")->required();
  map->add_option("--plane", plane, "zx, zy or xy")->check(CLI::IsMember({"zx", "zy", "xy"}));
  map->add_option("--n", points, "Points per side")->check(CLI::Range(2, 100000));
  map->add_option("--offset", offset_text, "Plane offset along its normal, e.g. \"0.1 mm\"");
  map->add_option("--half-width", half_text, "Half-width of the square, e.g. \"1 mm\"");

  // compare
  auto* cmp = app.add_subcommand("compare", "BEM and FDM errors against the analytic ideal trap");
  std::string cmp_file, bem_list, fdm_list;
  int samples = 200;
  cmp->add_option("scenario", cmp_file, "ideal_quadrupole scenario file")->required();
  cmp->add_option("--bem-resolutions", bem_list, "Comma-separated mesh resolutions");
  cmp->add_option("--fdm-nodes", fdm_list, "Comma-separated grid sizes");
  cmp->add_option("--samples", samples, "Random sample points")->check(CLI::PositiveNumber);

  // stability
  auto* stab = app.add_subcommand("stability", "Mathieu stability diagram CSV");
  std::string a_range = "-0.4:0.4:81", q_range = "0:1:101", stab_out;
  stab->add_option("--a-range", a_range, "a_min:a_max:n");
  stab->add_option("--q-range", q_range, "q_min:q_max:n");
  stab->add_option("--file", stab_out, "CSV path (default: <output>/stability.csv, '-' for stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "Check a scenario file");
  std::vector<std::string> val_files;
  bool echo = false;
  val->add_option("scenario", val_files, "Scenario files")->required();
  val->add_flag("--echo", echo, "Print the normalized scenario");

  // geometry
  auto* geo = app.add_subcommand("geometry", "Export the panel mesh as CSV");
  std::string geo_file;
  geo->add_option("scenario", geo_file, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : config_error;
  }
  const fs::path out_dir = output_dir(output);

  if (*run) {
    return guarded("run", [&] {
      std::vector<fs::path> files(run_files.begin(), run_files.end());
      if (run->count("--all")) {
        const fs::path dir = all_dir.empty() ? fs::path("scenarios") : fs::path(all_dir);
        if (!fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
        for (const auto& e : fs::directory_iterator(dir))
          if (e.path().extension() == ".cfg") files.push_back(e.path());
        std::sort(files.begin(), files.end());
      }
      if (files.empty()) throw ConfigError("no scenario files given");
      RunOptions o;
      o.output_dir = out_dir;
      if (!duration_text.empty()) o.duration = parse_quantity(duration_text, Dimension::time);

      std::vector<int> codes(files.size(), ok);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next++) < files.size();) codes[i] = run_one(files[i], o, verbose);
      };
      const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
      const std::size_t n = std::min<std::size_t>(files.size(), jobs > 0 ? jobs : hw);
      std::vector<std::jthread> pool;
      for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
      worker();
      pool.clear();
      return *std::max_element(codes.begin(), codes.end());
    });
  }

  if (*map) {
    return guarded(map_file, [&] {
      const Scenario sc = Scenario::load(map_file);
      const FieldSetup field = prepare_field(sc);
      const double offset = parse_quantity(offset_text, Dimension::length);
      const double half = half_text.empty() ? default_map_half_width(*field.geometry)
                                            : parse_quantity(half_text, Dimension::length);
      const fs::path dir = out_dir / sc.name;
      fs::create_directories(dir);
      const fs::path path = dir / ("potential_map_" + plane + ".csv");
      std::ofstream os(path);
      export_potential_map(os, field, make_drive(sc), plane, points, half, offset);
      if (!os) throw Error("cannot write '" + path.string() + "'");
      std::cout << "wrote " << path.string() << '\n';
      return ok;
    });
  }

  if (*cmp) {
    return guarded(cmp_file, [&] {
      const Scenario sc = Scenario::load(cmp_file);
      CompareOptions co;
      co.samples = samples;
      if (!bem_list.empty()) co.bem_resolutions = parse_ints(bem_list);
      if (!fdm_list.empty()) co.fdm_nodes = parse_ints(fdm_list);
      const auto rows = compare_methods(sc, co);
      std::ostringstream csv;
      write_comparison_csv(csv, rows);
      std::cout << csv.str();
      const fs::path dir = out_dir / sc.name;
      fs::create_directories(dir);
      std::ofstream(dir / "comparison.csv") << csv.str();
      std::cout << "wrote " << (dir / "comparison.csv").string() << '\n';
      return ok;
    });
  }

  if (*stab) {
    return guarded("stability", [&] {
      const Range a = parse_range(a_range), q = parse_range(q_range);
      std::ostringstream csv;
      write_stability_csv(csv, a.lo, a.hi, a.n, q.lo, q.hi, q.n);
      write_or_print(stab_out.empty() ? (out_dir / "stability.csv").string() : stab_out, csv.str());
      return ok;
    });
  }

  if (*val) {
    int worst = ok;
    for (const auto& f : val_files) {
      worst = std::max(worst, guarded(f, [&] {
        const Scenario sc = Scenario::load(f);
        sc.validate();
        std::cout << f << ": ok (" << sc.name << ", " << to_string(sc.trap) << ")\n";
        if (echo) std::cout << sc.serialize();
        return ok;
      }));
    }
    return worst;
  }

  if (*geo) {
    return guarded(geo_file, [&] {
      const Scenario sc = Scenario::load(geo_file);
      const TrapGeometry g = sc.build_geometry();
      const fs::path dir = out_dir / sc.name;
      fs::create_directories(dir);
      std::ofstream os(dir / "geometry.csv");
      write_panels_csv(os, g);
      std::cout << g.panels().size() << " panels, wrote " << (dir / "geometry.csv").string() << '\n';
      return ok;
    });
  }
  return ok;
}
