#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "moments.hpp"
#include "stepper.hpp"

namespace bpdg {

// Comment block written at the top of every output file.
inline void write_header(std::ostream& os, const Simulation& sim, const std::string& digest) {
  const auto& c = sim.constants();
  char buf[64];
  auto kv = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << "# " << k << '=' << buf << '\n';
  };
  os << "# device=" << sim.device().name << '\n';
  kv("time", sim.state().t);
  os << "# step=" << sim.state().step << '\n';
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(grid_hash(sim.grid())));
  os << "# grid_hash=" << buf << '\n';
  os << "# config_digest=" << digest << '\n';
  kv("c0", c.c0);
  kv("c_plus", c.c_plus);
  kv("c_minus", c.c_minus);
  kv("c_x", c.c_x);
  kv("c_k", c.c_k);
  kv("c_p", c.c_p);
  kv("c_v", c.c_v);
  kv("gamma", c.gamma);
  kv("alpha_K", c.alpha_K);
  kv("eps_r_si", c.eps_r_si);
  kv("eps_r_ox", c.eps_r_ox);
}

namespace detail {
inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

inline void put(std::ostream& os, double v, bool last = false) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf << (last ? '\n' : ',');
}
}  // namespace detail

// One row per spatial cell centre, dimensional columns first.
inline void write_macroscopic(const Simulation& sim, const std::string& path, const std::string& digest = "",
                              const ConversionFactors& cf = {}) {
  const PhaseGrid& g = sim.grid();
  const bool two = g.two_d();
  const MacroField mf = all_moments(sim.state().field, sim.streaming_tables(), g);
  const PoissonSolution& ps = sim.state().poisson;
  const FieldSample& E = sim.field_sample();
  const std::size_t nyp = two ? g.poisson_y.size() : 1;
  auto os = detail::open_out(path);
  write_header(os, sim, digest);
  os << "x,";
  if (two) os << "y,";
  os << "density_cm3,velocity_x_cm_s,";
  if (two) os << "velocity_y_cm_s,";
  os << "energy_eV,Efield_x_kV_cm,";
  if (two) os << "Efield_y_kV_cm,";
  os << "potential_V,momentum_cm2_s,";
  if (two) os << "momentum_y_cm2_s,";
  os << "rho,rho_x,";
  if (two) os << "rho_y,";
  os << "velocity_x,";
  if (two) os << "velocity_y,";
  os << "energy,efield_x,";
  if (two) os << "efield_y,";
  os << "potential,flag\n";
  const double mom_scale = cf.density_factor * 1e-6 * cf.velocity_factor * 100.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) {
      const std::size_t s = i * g.ny() + j;
      const double psi = ps.psi.empty() ? 0.0 : ps.psi_mean(i * nyp + j);
      detail::put(os, g.x.center(i));
      if (two) detail::put(os, g.y.center(j));
      detail::put(os, cf.density_cm3(mf.rho[s]));
      detail::put(os, cf.velocity_cm_s(mf.vel_x[s]));
      if (two) detail::put(os, cf.velocity_cm_s(mf.vel_y[s]));
      detail::put(os, cf.energy_eV(mf.energy[s]));
      detail::put(os, E.ex[s] * cf.field_kV_per_cm);
      if (two) detail::put(os, E.ey[s] * cf.field_kV_per_cm);
      detail::put(os, psi * cf.voltage_scale);
      detail::put(os, mf.mom_x[s] * mom_scale);
      if (two) detail::put(os, mf.mom_y[s] * mom_scale);
      detail::put(os, mf.rho[s]);
      detail::put(os, mf.rho_x[s]);
      if (two) detail::put(os, mf.rho_y[s]);
      detail::put(os, mf.vel_x[s]);
      if (two) detail::put(os, mf.vel_y[s]);
      detail::put(os, mf.energy[s]);
      detail::put(os, E.ex[s]);
      if (two) detail::put(os, E.ey[s]);
      detail::put(os, psi);
      os << mf.flag[s] << '\n';
    }
}

// Potential on every Dirichlet boundary face: the imposed value used by the
// scheme and the trace of the adjacent cell.
inline void write_contact_potentials(const Simulation& sim, const std::string& path, const std::string& digest = "") {
  static const char* names[] = {"left", "right", "bottom", "top"};
  auto os = detail::open_out(path);
  write_header(os, sim, digest);
  os << "side,position,imposed_V,interior_trace_V\n";
  for (const auto& f : sim.poisson_solver().dirichlet_traces(sim.state().poisson)) {
    os << names[static_cast<int>(f.side)] << ',';
    detail::put(os, f.along);
    detail::put(os, f.imposed);
    detail::put(os, f.interior, true);
  }
}

struct PdfSample {
  double w, mu, value, v1, v2;
};

// Phi at the (w, mu) cell centres of the spatial cell holding (x, y),
// averaged over phi in 2D.
inline std::vector<PdfSample> pdf_slice(const DGField& f, const PhaseGrid& g, double alpha_K, double x, double y = 0.0) {
  if (x < g.x.lo() || x > g.x.hi() || (g.two_d() && (y < g.y.lo() || y > g.y.hi())))
    throw std::domain_error("pdf_slice: location outside the device");
  const std::size_t i = g.x.locate(x), j = g.two_d() ? g.y.locate(y) : 0;
  std::vector<PdfSample> out;
  out.reserve(g.nw() * g.nmu());
  for (std::size_t k = 0; k < g.nw(); ++k)
    for (std::size_t m = 0; m < g.nmu(); ++m) {
      double v = 0.0;
      for (std::size_t n = 0; n < g.nphi(); ++n)
        v += f.c[0][g.index(i, j, k, m, n)] * (g.two_d() ? g.phi.width(n) / kPi : 1.0);
      const double w = g.w.center(k), mu = g.mu.center(m), r = kane_root(w, alpha_K);
      out.push_back({w, mu, v, r * mu, r * std::sqrt(1.0 - mu * mu)});
    }
  return out;
}

inline void write_pdf_slice(const Simulation& sim, double x, double y, const std::string& path, bool cartesian,
                            const std::string& digest = "") {
  const auto samples = pdf_slice(sim.state().field, sim.grid(), sim.constants().alpha_K, x, y);
  auto os = detail::open_out(path);
  write_header(os, sim, digest);
  char buf[80];
  std::snprintf(buf, sizeof buf, "# slice_x=%.17g\n", x);
  os << buf;
  if (sim.grid().two_d()) {
    std::snprintf(buf, sizeof buf, "# slice_y=%.17g\n", y);
    os << buf;
  }
  os << (cartesian ? "w,mu,pdf,v1,v2\n" : "w,mu,pdf\n");
  for (const auto& s : samples) {
    detail::put(os, s.w);
    detail::put(os, s.mu);
    detail::put(os, s.value, !cartesian);
    if (cartesian) {
      detail::put(os, s.v1);
      detail::put(os, s.v2, true);
    }
  }
}

// Config-driven transient run with all file output. Returns the final state.
inline RunState run_from_config(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string digest = config_digest(cfg);
  save_config(cfg, (fs::path(cfg.out_dir) / "run.cfg").string());
  Simulation sim(cfg.resolved_device(), cfg.build_grid(), cfg.constants, step_options(cfg));
  auto emit = [&](const std::string& tag) {
    const fs::path dir(cfg.out_dir);
    write_macroscopic(sim, (dir / ("macro_" + tag + ".csv")).string(), digest);
    write_contact_potentials(sim, (dir / ("contacts_" + tag + ".csv")).string(), digest);
    for (std::size_t s = 0; s < cfg.output.slices.size(); ++s) {
      const auto& p = cfg.output.slices[s];
      write_pdf_slice(sim, p[0], p[1], (dir / ("pdf_" + tag + "_" + std::to_string(s) + ".csv")).string(),
                      cfg.output.cartesian, digest);
    }
    log << "wrote snapshot " << tag << " at t = " << sim.state().t << '\n';
  };
  char tag[32];
  sim.run(cfg.t_end, cfg.output.snapshots, [&](const RunState& st, std::size_t) {
    std::snprintf(tag, sizeof tag, "t%.6g", st.t);
    emit(tag);
  });
  emit("final");
  if (cfg.output.checkpoint) {
    Checkpoint ck{sim.state().t, grid_hash(sim.grid()), sim.constants(), sim.state().field};
    write_checkpoint((fs::path(cfg.out_dir) / "final.ckpt").string(), ck);
  }
  return sim.state();
}

}  // namespace bpdg
