#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpdg/bpdg.hpp"

namespace {

int cmd_presets() {
  for (auto p : bpdg::preset_catalog()) {
    const bpdg::RunConfig c = bpdg::preset_config(p);
    const bpdg::PhaseGrid g = c.build_grid();
    std::printf("%-9s %s  cells %zu  t_end %g  scheme %s\n", bpdg::preset_name(p).c_str(), g.two_d() ? "2D" : "1D",
                g.cells(), c.t_end, bpdg::scheme_name(c.scheme).c_str());
  }
  return 0;
}

int cmd_poisson_test(const std::vector<std::size_t>& cells, bool two_d, const std::string& dump) {
  const auto rows = bpdg::poisson_convergence(cells, two_d);
  std::printf("%8s %14s %8s\n", "cells", "L2 error", "order");
  for (const auto& r : rows) std::printf("%8zu %14.6e %8.3f\n", r.cells, r.error, r.order);
  if (!dump.empty()) {
    bpdg::PoissonBC bc;
    bc.add(bpdg::Side::Left, 0.0).add(bpdg::Side::Right, 0.0);
    const auto x = bpdg::uniform_axis(0.0, 1.0, cells.front());
    if (two_d) {
      const auto y = bpdg::uniform_axis(0.0, 1.0, cells.front());
      bc.add(bpdg::Side::Bottom, 0.0).add(bpdg::Side::Top, 0.0);
      bpdg::LdgPoisson(x, y, std::vector<double>(x.size() * y.size(), 1.0), bc).dump_matrix_market(dump);
    } else {
      bpdg::LdgPoisson(x, std::vector<double>(x.size(), 1.0), bc).dump_matrix_market(dump);
    }
    std::printf("matrix written to %s\n", dump.c_str());
  }
  return 0;
}

int cmd_tables_dump(const std::string& preset, bool coarse, double w_max, const std::string& out) {
  const bpdg::RunConfig c = bpdg::preset_config(bpdg::parse_preset(preset), coarse);
  bpdg::RunConfig cfg = c;
  cfg.w_max = w_max;
  const bpdg::PhaseGrid g = cfg.build_grid();
  const auto ct = bpdg::build_collision_tables(g, cfg.constants);
  const auto st = bpdg::build_streaming_tables(g, cfg.constants);
  if (out.empty()) {
    bpdg::dump_tables(std::cout, g, ct, st);
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    bpdg::dump_tables(os, g, ct, st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic Boltzmann-Poisson device solver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "transient simulation driven by a config file or a preset");
  std::string config_path, preset, scheme, out_dir;
  bool coarse = false;
  std::optional<double> t_end, cfl, w_max;
  run->add_option("--config", config_path, "INI run configuration");
  run->add_option("--preset", preset, "built-in device (diode400, diode50, mosfet) when no config is given");
  run->add_flag("--coarse", coarse, "use the reduced mesh of the preset");
  run->add_option("--t-end", t_end, "final time (dimensionless)");
  run->add_option("--cfl", cfl, "CFL number in (0, 1]");
  run->add_option("--wmax", w_max, "upper end of the energy axis");
  run->add_option("--scheme", scheme, "euler or rk2");
  run->add_option("--out-dir", out_dir, "output directory");

  auto* pt = app.add_subcommand("poisson-test", "manufactured-solution convergence table for the Poisson solver");
  std::vector<std::size_t> cells{32, 64, 128};
  bool two_d = false;
  std::string dump;
  pt->add_option("--cells", cells, "cell counts per axis")->delimiter(',');
  pt->add_flag("--2d", two_d, "run the 2D problem");
  pt->add_option("--dump-matrix", dump, "write the system matrix (coarsest grid) in Matrix Market form");

  auto* td = app.add_subcommand("tables-dump", "print the collision and streaming tables");
  std::string td_preset = "diode400", td_out;
  bool td_coarse = false;
  double td_wmax = 40.0;
  td->add_option("--preset", td_preset, "device whose grid is used");
  td->add_flag("--coarse", td_coarse, "use the reduced mesh");
  td->add_option("--wmax", td_wmax, "upper end of the energy axis");
  td->add_option("--out", td_out, "output file (default: stdout)");

  auto* ps = app.add_subcommand("presets", "list built-in devices");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ps) return cmd_presets();
    if (*pt) return cmd_poisson_test(cells, two_d, dump);
    if (*td) return cmd_tables_dump(td_preset, td_coarse, td_wmax, td_out);
    bpdg::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = bpdg::load_config(config_path);
    } else if (!preset.empty()) {
      cfg = bpdg::preset_config(bpdg::parse_preset(preset), coarse);
    } else {
      std::cerr << "run: give --config or --preset\n" << app.help();
      return 2;
    }
    if (t_end) cfg.t_end = *t_end;
    if (cfl) cfg.cfl = *cfl;
    if (w_max) cfg.w_max = *w_max;
    if (!scheme.empty()) cfg.scheme = bpdg::parse_scheme(scheme);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    const bpdg::RunState st = bpdg::run_from_config(cfg, std::cerr);
    std::printf("finished at t = %g after %zu steps; output in %s\n", st.t, st.step, cfg.out_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
