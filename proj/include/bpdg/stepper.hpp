#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "collision.hpp"
#include "constants.hpp"
#include "device.hpp"
#include "mesh.hpp"
#include "moments.hpp"
#include "poisson.hpp"
#include "quadtables.hpp"
#include "transport.hpp"

namespace bpdg {

enum class Scheme { Euler, Rk2 };

inline std::string scheme_name(Scheme s) { return s == Scheme::Euler ? "euler" : "rk2"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "euler") return Scheme::Euler;
  if (s == "rk2") return Scheme::Rk2;
  throw std::invalid_argument("unknown time scheme '" + s + "' (expected euler or rk2)");
}

struct RunState {
  double t = 0.0;
  DGField field;
  PoissonSolution poisson;
  std::size_t step = 0;
  double dt = 0.0;
};

// Corner speed bounds per velocity cell, reusable across steps. The factors
// that blow up at w = 0 or mu = +-1 are replaced by their cell averages.
class SpeedBounds {
 public:
  SpeedBounds(const PhaseGrid& g, const StreamingTables& st, const DimensionlessConstants& c) : g_(g) {
    const bool two = g.two_d();
    const std::size_t nv = g.velocity_cells();
    corners_ = two ? 8 : 4;
    ax_.assign(nv, 0.0);
    ay_.assign(nv, 0.0);
    data_.assign(nv * corners_ * 5, 0.0);
    for (std::size_t k = 0; k < g.nw(); ++k)
      for (std::size_t m = 0; m < g.nmu(); ++m)
        for (std::size_t n = 0; n < g.nphi(); ++n) {
          const std::size_t v = g.velocity_index(k, m, n);
          std::size_t cn = 0;
          for (int dk = 0; dk < 2; ++dk)
            for (int dm = 0; dm < 2; ++dm)
              for (int dn = 0; dn < (two ? 2 : 1); ++dn, ++cn) {
                const double w = g.w.edge(k + dk), mu = g.mu.edge(m + dm);
                const double s1 = weight_s1(w, c.alpha_K);
                const double s2 = w > 0.0 ? weight_s2(w, c.alpha_K) : st.s2[k][0] / g.w.width(k);
                const double sq = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                const double rs = sq > 0.0 ? 1.0 / sq : st.inv_sqrt_1mmu2[m][0] / g.mu.width(m);
                const double ph = two ? g.phi.edge(n + dn) : 0.5 * kPi;
                const double cp = two ? std::cos(ph) : 0.0, sp = std::sin(ph);
                ax_[v] = std::max(ax_[v], c.c_x * std::abs(mu) * s1);
                if (two) ay_[v] = std::max(ay_[v], c.c_x * sq * std::abs(cp) * s1);
                double* d = &data_[(v * corners_ + cn) * 5];
                d[0] = 2.0 * c.c_k * s1 * mu;        // w speed, Ex part
                d[1] = 2.0 * c.c_k * s1 * sq * cp;   // w speed, Ey part
                d[2] = c.c_k * s2 * (1.0 - mu * mu);  // mu speed, Ex part
                d[3] = -c.c_k * s2 * mu * sq * cp;   // mu speed, Ey part
                d[4] = c.c_k * s2 * rs * std::abs(sp);  // phi speed per unit |Ey|
              }
        }
  }

  // Largest sum over axes of (speed bound / width) across all cells.
  double max_rate(const FieldSample& E) const {
    const bool two = g_.two_d();
    const std::size_t ns = g_.spatial_cells(), ny = g_.ny();
    double rate = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      const double ex = E.ex[s], ey = two ? E.ey[s] : 0.0;
      if (!std::isfinite(ex) || !std::isfinite(ey)) throw std::domain_error("compute_dt: non-finite electric field");
      const double ix = 1.0 / g_.x.width(s / ny), iy = two ? 1.0 / g_.y.width(s % ny) : 0.0;
      for (std::size_t k = 0; k < g_.nw(); ++k) {
        const double iw = 1.0 / g_.w.width(k);
        for (std::size_t m = 0; m < g_.nmu(); ++m) {
          const double imu = 1.0 / g_.mu.width(m);
          for (std::size_t n = 0; n < g_.nphi(); ++n) {
            const std::size_t v = g_.velocity_index(k, m, n);
            double bw = 0.0, bm = 0.0, bp = 0.0;
            const double* d = &data_[v * corners_ * 5];
            for (std::size_t cn = 0; cn < corners_; ++cn, d += 5) {
              bw = std::max(bw, std::abs(d[0] * ex + d[1] * ey));
              bm = std::max(bm, std::abs(d[2] * ex + d[3] * ey));
              bp = std::max(bp, d[4]);
            }
            double r = ax_[v] * ix + bw * iw + bm * imu;
            if (two) r += ay_[v] * iy + bp * std::abs(ey) / g_.phi.width(n);
            rate = std::max(rate, r);
          }
        }
      }
    }
    return rate;
  }

 private:
  PhaseGrid g_;
  std::size_t corners_ = 4;
  std::vector<double> ax_, ay_, data_;
};

inline double compute_dt(const SpeedBounds& bounds, const FieldSample& E, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("compute_dt: cfl must lie in (0, 1]");
  const double rate = bounds.max_rate(E);
  return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

inline double compute_dt(const PhaseGrid& g, const StreamingTables& st, const DimensionlessConstants& c, const FieldSample& E,
                         double cfl) {
  return compute_dt(SpeedBounds(g, st, c), E, cfl);
}

struct StepOptions {
  Scheme scheme = Scheme::Rk2;
  double cfl = 0.2;
  bool transport = true;
  bool collisions = true;
  // When set, this field is used at every stage and Poisson is skipped.
  std::optional<FieldSample> frozen_field;
  double nu_dt_limit = 0.9;
  double max_dt = std::numeric_limits<double>::infinity();
  std::size_t log_every = 0;  // 0 disables the progress log
};

struct StepDiagnostics {
  double wall_flux_ratio = 0.0;  // max over stages of |net| / gross y-wall flux
  double rhs_norm = 0.0;         // L2 norm of dPhi/dt at the first stage
};

// Coupled Boltzmann-Poisson time integration for one device.
class Simulation {
 public:
  Simulation(DeviceSpec device, PhaseGrid grid, DimensionlessConstants c, StepOptions opt = {})
      : device_(std::move(device)),
        g_(validated(std::move(grid))),
        c_(c),
        opt_(std::move(opt)),
        ct_(build_collision_tables(g_, c_)),
        st_(build_streaming_tables(g_, c_)),
        transport_(g_, st_, c_),
        collision_(g_, ct_, c_),
        bounds_(g_, st_, c_),
        doping_(device_, g_.x),
        poisson_(make_device_poisson(device_, g_, c_)) {
    device_.validate();
    if (g_.two_d() != (device_.dim == Dim::Two)) throw std::invalid_argument("device and grid dimensionality differ");
    if (device_.contacts == ContactMode::Reflecting && !mu_symmetric(g_))
      throw std::invalid_argument("reflecting walls need a mu grid symmetric about 0");
    nu_max_ = loss_frequency(g_.w.hi(), c_);
    state_.field = initial_condition(g_, c_, doping_.cell_averages());
    refresh_field();
  }

  const PhaseGrid& grid() const { return g_; }
  const DimensionlessConstants& constants() const { return c_; }
  const DeviceSpec& device() const { return device_; }
  const DopingProfile& doping() const { return doping_; }
  const StreamingTables& streaming_tables() const { return st_; }
  const CollisionTables& collision_tables() const { return ct_; }
  const LdgPoisson& poisson_solver() const { return poisson_; }
  const StepOptions& options() const { return opt_; }
  StepOptions& options() { return opt_; }
  const RunState& state() const { return state_; }
  const FieldSample& field_sample() const { return E_; }
  const StepDiagnostics& last_diagnostics() const { return diag_; }
  double nu_max() const { return nu_max_; }

  // Use a fixed field sample (Poisson is skipped) or, with nullopt, go back
  // to the self-consistent field.
  void set_frozen_field(std::optional<FieldSample> E) {
    opt_.frozen_field = std::move(E);
    refresh_field();
  }

  void set_field(DGField f, double t = 0.0) {
    check_compatible(f, g_);
    state_.field = std::move(f);
    state_.t = t;
    refresh_field();
  }

  // Poisson right-hand side c_p (rho - N_D) as P1 coefficients on the Poisson grid.
  std::vector<double> poisson_rhs(const DGField& f) const {
    const MacroField m = density(f, g_);
    const std::size_t nx = g_.nx(), ny = g_.ny();
    if (!g_.two_d()) {
      std::vector<double> r(nx * 2);
      for (std::size_t i = 0; i < nx; ++i) {
        r[2 * i] = c_.c_p * (m.rho[i] - doping_.cell_average(i));
        r[2 * i + 1] = c_.c_p * m.rho_x[i];
      }
      return r;
    }
    const std::size_t nyp = g_.poisson_y.size();
    std::vector<double> r(nx * nyp * 3, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t s = i * ny + j, p = (i * nyp + j) * 3;
        r[p] = c_.c_p * (m.rho[s] - doping_.cell_average(i));
        r[p + 1] = c_.c_p * m.rho_x[s];
        r[p + 2] = c_.c_p * m.rho_y[s];
      }
    return r;
  }

  // Field sample on the transport grid from a Poisson solution.
  FieldSample sample_field(const PoissonSolution& sol) const {
    FieldSample E;
    const std::size_t nx = g_.nx(), ny = g_.ny();
    E.ex.resize(nx * ny);
    if (g_.two_d()) E.ey.resize(nx * ny);
    const std::size_t nyp = g_.two_d() ? g_.poisson_y.size() : 1;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        E.ex[i * ny + j] = sol.ex(i * nyp + j);
        if (g_.two_d()) E.ey[i * ny + j] = sol.ey(i * nyp + j);
      }
    return E;
  }

  GhostLayers ghosts(const DGField& f) const {
    GhostLayers gh;
    switch (device_.contacts) {
      case ContactMode::Neutral: contact_ghosts(f, g_, doping_.cell_averages(), gh); break;
      case ContactMode::ZeroInflow: zero_inflow_ghosts(g_, f.nb(), gh); break;
      case ContactMode::Reflecting: reflecting_x_ghosts(f, g_, gh); break;
    }
    if (g_.two_d()) specular_ghosts(f, g_, gh);
    return gh;
  }

  // dPhi/dt for a given field and field sample.
  void rhs(const DGField& f, const FieldSample& E, DGField& out, double* wall_ratio = nullptr) const {
    if (!out.same_shape(f)) out = DGField(g_);
    if (opt_.transport) {
      const GhostLayers gh = ghosts(f);
      transport_.apply(f, E, gh, out);
      if (wall_ratio && g_.two_d()) {
        const auto wf = transport_.wall_mass_flux(f, gh);
        *wall_ratio = std::max(*wall_ratio, wf[1] > 0.0 ? std::abs(wf[0]) / wf[1] : 0.0);
      }
    } else {
      out.fill(0.0);
    }
    if (opt_.collisions) collision_.accumulate(f, out);
  }

  // Stable step size for the current field sample. Disabled terms impose no limit.
  double stable_dt() const {
    double dt = opt_.transport ? compute_dt(bounds_, E_, opt_.cfl) : std::numeric_limits<double>::infinity();
    if (opt_.collisions) dt = std::min(dt, opt_.nu_dt_limit / nu_max_);
    return std::min(dt, opt_.max_dt);
  }

  // Advance one step, never past t_limit. With rk2 both stages share the
  // step size chosen from the field at the start of the step.
  void step(double t_limit = std::numeric_limits<double>::infinity()) {
    diag_ = {};
    double ratio = 0.0;
    rhs(state_.field, E_, k1_, &ratio);
    diag_.rhs_norm = std::sqrt(l2_norm_squared(k1_, g_));
    const double dt = std::min(stable_dt(), t_limit - state_.t);
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::runtime_error("step: invalid step size");
    if (opt_.scheme == Scheme::Euler) {
      state_.field.axpy(dt, k1_);
    } else {
      u1_ = state_.field;
      u1_.axpy(dt, k1_);
      const FieldSample E1 = stage_field(u1_);
      rhs(u1_, E1, k2_, &ratio);
      // u <- u/2 + (u1 + dt k2)/2
      for (std::size_t q = 0; q < state_.field.nb(); ++q) {
        auto& a = state_.field.c[q];
        const auto &b = u1_.c[q], &k = k2_.c[q];
        for (std::size_t id = 0; id < a.size(); ++id) a[id] = 0.5 * a[id] + 0.5 * (b[id] + dt * k[id]);
      }
    }
    diag_.wall_flux_ratio = ratio;
    state_.t = (t_limit - state_.t == dt) ? t_limit : state_.t + dt;
    state_.dt = dt;
    ++state_.step;
    check_finite();
    refresh_field();
    if (opt_.log_every && state_.step % opt_.log_every == 0) log_progress(std::cerr);
  }

  // Advance to t_end. The observer sees the state after every step and may
  // return false to stop early; snapshot times are hit exactly.
  void run(double t_end, const std::vector<double>& snapshots = {},
           const std::function<void(const RunState&, std::size_t)>& on_snapshot = {},
           const std::function<bool(const Simulation&)>& observer = {}) {
    if (t_end < state_.t) throw std::invalid_argument("run: t_end lies before the current time");
    std::vector<double> marks(snapshots);
    std::sort(marks.begin(), marks.end());
    std::size_t next = 0;
    while (next < marks.size() && marks[next] <= state_.t) {
      if (on_snapshot) on_snapshot(state_, next);
      ++next;
    }
    while (state_.t < t_end) {
      const double limit = next < marks.size() ? std::min(marks[next], t_end) : t_end;
      step(limit);
      while (next < marks.size() && marks[next] <= state_.t) {
        if (on_snapshot) on_snapshot(state_, next);
        ++next;
      }
      if (observer && !observer(*this)) break;
    }
  }

  void log_progress(std::ostream& os) const {
    std::ostringstream line;
    line.precision(6);
    line << "step " << state_.step << " t " << state_.t << " dt " << state_.dt << " mass " << total_number(state_.field, g_)
         << " residual " << diag_.rhs_norm << '\n';
    os << line.str();
  }

 private:
  static PhaseGrid validated(PhaseGrid g) {
    g.validate();
    return g;
  }

  FieldSample stage_field(const DGField& f) {
    if (opt_.frozen_field) return *opt_.frozen_field;
    last_poisson_ = poisson_.solve(poisson_rhs(f));
    return sample_field(last_poisson_);
  }

  void refresh_field() {
    E_ = stage_field(state_.field);
    state_.poisson = last_poisson_;
  }

  void check_finite() const {
    for (std::size_t q = 0; q < state_.field.nb(); ++q)
      for (std::size_t id = 0; id < state_.field.c[q].size(); ++id)
        if (!std::isfinite(state_.field.c[q][id])) {
          std::ostringstream os;
          os << "non-finite coefficient " << coef_name(g_.dim, q) << " at cell " << id << " after step " << state_.step
             << " (t = " << state_.t << ", dt = " << state_.dt << ")";
          throw std::runtime_error(os.str());
        }
  }

  DeviceSpec device_;
  PhaseGrid g_;
  DimensionlessConstants c_;
  StepOptions opt_;
  CollisionTables ct_;
  StreamingTables st_;
  TransportOperator transport_;
  CollisionOperator collision_;
  SpeedBounds bounds_;
  DopingProfile doping_;
  LdgPoisson poisson_;
  double nu_max_ = 0.0;
  RunState state_;
  PoissonSolution last_poisson_;
  FieldSample E_;
  StepDiagnostics diag_;
  DGField k1_, k2_, u1_;
};

}  // namespace bpdg
