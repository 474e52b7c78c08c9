#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "constants.hpp"
#include "device.hpp"
#include "mesh.hpp"
#include "stepper.hpp"

namespace bpdg {

struct OutputPlan {
  std::vector<double> snapshots;                // times at which CSVs are written (t_end is always written)
  std::vector<std::array<double, 2>> slices;    // (x, y) sample points for distribution slices; y unused in 1D
  bool cartesian = true;                        // add (V1, V2) columns to slices
  bool checkpoint = false;                      // binary checkpoint at t_end
  friend bool operator==(const OutputPlan&, const OutputPlan&) = default;
};

struct RunConfig {
  DevicePreset preset = DevicePreset::Diode400;
  DeviceSpec device;
  Scheme scheme = Scheme::Rk2;
  double cfl = 0.2;
  double t_end = 5.0;
  double w_max = 40.0;
  DiodeMeshSpec diode_mesh;
  MosfetMeshSpec mosfet_mesh;
  DimensionlessConstants constants;
  OutputPlan output;
  std::string out_dir = "out";
  std::size_t log_every = 100;

  bool two_d() const { return device.dim == Dim::Two; }

  PhaseGrid build_grid() const {
    if (two_d()) return make_grid_2d(mosfet_mesh, w_max);
    return make_grid_1d(build_axis(diode_mesh.x), uniform_axis(0.0, w_max, diode_mesh.nw), build_axis(diode_mesh.mu));
  }

  // Device with the geometry taken from the mesh description.
  DeviceSpec resolved_device() const {
    DeviceSpec d = device;
    if (two_d()) {
      d.geometry = mosfet_mesh;
      d.length = mosfet_mesh.length;
    } else if (!diode_mesh.x.empty()) {
      d.length = diode_mesh.x.back().end;
    }
    return d;
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) { throw std::invalid_argument(field + ": " + why); };
    if (!(cfl > 0.0 && cfl <= 1.0)) fail("run.cfl", "must lie in (0, 1]");
    if (!(t_end > 0.0)) fail("run.t_end", "must be positive");
    if (!(w_max > 0.0)) fail("run.w_max", "must be positive");
    for (double t : output.snapshots)
      if (t < 0.0 || t > t_end) fail("output.snapshots", "snapshot times must lie in [0, t_end]");
    constants.validate();
    resolved_device().validate();
    const PhaseGrid g = build_grid();
    for (const auto& p : output.slices) {
      if (p[0] < g.x.lo() || p[0] > g.x.hi()) fail("output.slices", "slice position outside the device");
      if (two_d() && (p[1] < g.y.lo() || p[1] > g.y.hi())) fail("output.slices", "slice position outside the silicon");
    }
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Preset defaults: the production mesh, end time and scheme for each device.
inline RunConfig preset_config(DevicePreset p, bool coarse = false) {
  RunConfig c;
  c.preset = p;
  c.device = preset_device(p);
  switch (p) {
    case DevicePreset::Diode400:
      c.t_end = 5.0;
      c.output.slices = {{0.3, 0.0}, {0.5, 0.0}, {0.7, 0.0}};
      break;
    case DevicePreset::Diode50:
      c.t_end = 3.0;
      c.output.slices = {{0.1, 0.0}, {0.125, 0.0}, {0.15, 0.0}};
      break;
    case DevicePreset::Mosfet:
      c.t_end = 0.5;
      c.scheme = Scheme::Euler;
      c.cfl = 0.1;
      c.output.slices = {{0.075, 0.01}};
      break;
  }
  if (p == DevicePreset::Mosfet) {
    c.mosfet_mesh = mosfet_mesh_spec(coarse);
    c.device.geometry = c.mosfet_mesh;
  } else {
    c.diode_mesh = diode_mesh_spec(p, coarse);
  }
  return c;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& field, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(field + ": not a number: '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw std::invalid_argument(field + ": trailing characters in '" + s + "'");
  return v;
}

inline std::size_t parse_count(const std::string& field, const std::string& s) {
  const double v = parse_double(field, s);
  if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw std::invalid_argument(field + ": expected a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

inline bool parse_bool(const std::string& field, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument(field + ": expected true or false, got '" + s + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

inline std::vector<double> parse_doubles(const std::string& field, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(field, item));
  return out;
}

// Segments are written as "start:end:width" separated by commas.
inline std::string format_segments(const std::vector<Segment>& segs) {
  std::string s;
  for (std::size_t i = 0; i < segs.size(); ++i)
    s += (i ? ", " : "") + fmt_double(segs[i].start) + ":" + fmt_double(segs[i].end) + ":" + fmt_double(segs[i].width);
  return s;
}

inline std::vector<Segment> parse_segments(const std::string& field, const std::string& s) {
  std::vector<Segment> out;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw std::invalid_argument(field + ": expected start:end:width, got '" + item + "'");
    out.push_back({parse_double(field, parts[0]), parse_double(field, parts[1]), parse_double(field, parts[2])});
  }
  if (out.empty()) throw std::invalid_argument(field + ": empty segment list");
  return out;
}

inline std::string format_points(const std::vector<std::array<double, 2>>& pts, bool two_d) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s += (i ? ", " : "") + fmt_double(pts[i][0]);
    if (two_d) s += ":" + fmt_double(pts[i][1]);
  }
  return s;
}

inline std::vector<std::array<double, 2>> parse_points(const std::string& field, const std::string& s, bool two_d) {
  std::vector<std::array<double, 2>> out;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != (two_d ? 2u : 1u))
      throw std::invalid_argument(field + (two_d ? ": expected x:y, got '" : ": expected x, got '") + item + "'");
    out.push_back({parse_double(field, parts[0]), two_d ? parse_double(field, parts[1]) : 0.0});
  }
  return out;
}

inline std::string contact_name(ContactMode m) {
  switch (m) {
    case ContactMode::Neutral: return "neutral";
    case ContactMode::ZeroInflow: return "zero_inflow";
    case ContactMode::Reflecting: return "reflecting";
  }
  return "?";
}

inline ContactMode parse_contact(const std::string& field, const std::string& s) {
  if (s == "neutral") return ContactMode::Neutral;
  if (s == "zero_inflow") return ContactMode::ZeroInflow;
  if (s == "reflecting") return ContactMode::Reflecting;
  throw std::invalid_argument(field + ": expected neutral, zero_inflow or reflecting, got '" + s + "'");
}

struct ConfigKey {
  std::string name;  // section.key
  bool two_d_only, one_d_only;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = RunConfig;
  auto dbl = [](const std::string& name, double C::*field, bool two = false, bool one = false) {
    return ConfigKey{name, two, one, [field](const C& c) { return fmt_double(c.*field); },
                     [name, field](C& c, const std::string& v) { c.*field = parse_double(name, v); }};
  };
  auto dev = [](const std::string& name, double DeviceSpec::*field, bool two = false, bool one = false) {
    return ConfigKey{name, two, one, [field](const C& c) { return fmt_double(c.device.*field); },
                     [name, field](C& c, const std::string& v) { c.device.*field = parse_double(name, v); }};
  };
  auto cst = [](const std::string& name, double DimensionlessConstants::*field) {
    return ConfigKey{name, false, false, [field](const C& c) { return fmt_double(c.constants.*field); },
                     [name, field](C& c, const std::string& v) { c.constants.*field = parse_double(name, v); }};
  };
  auto mos_d = [](const std::string& name, double MosfetMeshSpec::*field) {
    return ConfigKey{name, true, false, [field](const C& c) { return fmt_double(c.mosfet_mesh.*field); },
                     [name, field](C& c, const std::string& v) { c.mosfet_mesh.*field = parse_double(name, v); }};
  };
  auto mos_n = [](const std::string& name, std::size_t MosfetMeshSpec::*field) {
    return ConfigKey{name, true, false, [field](const C& c) { return std::to_string(c.mosfet_mesh.*field); },
                     [name, field](C& c, const std::string& v) { c.mosfet_mesh.*field = parse_count(name, v); }};
  };
  static const std::vector<ConfigKey> keys = {
      {"run.device", false, false, [](const C& c) { return preset_name(c.preset); }, [](C&, const std::string&) {}},
      {"run.scheme", false, false, [](const C& c) { return scheme_name(c.scheme); },
       [](C& c, const std::string& v) {
         try {
           c.scheme = parse_scheme(v);
         } catch (const std::invalid_argument& e) {
           throw std::invalid_argument(std::string("run.scheme: ") + e.what());
         }
       }},
      dbl("run.cfl", &C::cfl),
      dbl("run.t_end", &C::t_end),
      dbl("run.w_max", &C::w_max),
      {"run.out_dir", false, false, [](const C& c) { return c.out_dir; }, [](C& c, const std::string& v) { c.out_dir = v; }},
      {"run.log_every", false, false, [](const C& c) { return std::to_string(c.log_every); },
       [](C& c, const std::string& v) { c.log_every = parse_count("run.log_every", v); }},
      {"device.contacts", false, false, [](const C& c) { return contact_name(c.device.contacts); },
       [](C& c, const std::string& v) { c.device.contacts = parse_contact("device.contacts", v); }},
      dev("device.n_plus_cm3", &DeviceSpec::n_plus_cm3),
      dev("device.n_minus_cm3", &DeviceSpec::n_minus_cm3),
      dev("device.channel_lo", &DeviceSpec::channel_lo),
      dev("device.channel_hi", &DeviceSpec::channel_hi),
      dev("device.v_left", &DeviceSpec::v_left, false, true),
      dev("device.v_right", &DeviceSpec::v_right, false, true),
      dev("device.v_source", &DeviceSpec::v_source, true),
      dev("device.v_drain", &DeviceSpec::v_drain, true),
      dev("device.v_gate", &DeviceSpec::v_gate, true),
      dev("device.gate_lo", &DeviceSpec::gate_lo, true),
      dev("device.gate_hi", &DeviceSpec::gate_hi, true),
      {"mesh.x", false, true, [](const C& c) { return format_segments(c.diode_mesh.x); },
       [](C& c, const std::string& v) { c.diode_mesh.x = parse_segments("mesh.x", v); }},
      {"mesh.mu", false, true, [](const C& c) { return format_segments(c.diode_mesh.mu); },
       [](C& c, const std::string& v) { c.diode_mesh.mu = parse_segments("mesh.mu", v); }},
      {"mesh.nw", false, true, [](const C& c) { return std::to_string(c.diode_mesh.nw); },
       [](C& c, const std::string& v) { c.diode_mesh.nw = parse_count("mesh.nw", v); }},
      mos_d("mesh.length", &MosfetMeshSpec::length),
      mos_d("mesh.si_height", &MosfetMeshSpec::si_height),
      mos_d("mesh.oxide_thickness", &MosfetMeshSpec::oxide_thickness),
      mos_n("mesh.cells_x", &MosfetMeshSpec::nx),
      mos_n("mesh.cells_y", &MosfetMeshSpec::ny),
      mos_n("mesh.cells_w", &MosfetMeshSpec::nw),
      mos_n("mesh.cells_mu", &MosfetMeshSpec::nmu),
      mos_n("mesh.cells_phi", &MosfetMeshSpec::nphi),
      mos_n("mesh.oxide_rows", &MosfetMeshSpec::oxide_rows),
      cst("constants.c0", &DimensionlessConstants::c0),
      cst("constants.c_plus", &DimensionlessConstants::c_plus),
      cst("constants.c_minus", &DimensionlessConstants::c_minus),
      cst("constants.c_x", &DimensionlessConstants::c_x),
      cst("constants.c_k", &DimensionlessConstants::c_k),
      cst("constants.c_p", &DimensionlessConstants::c_p),
      cst("constants.c_v", &DimensionlessConstants::c_v),
      cst("constants.gamma", &DimensionlessConstants::gamma),
      cst("constants.alpha_K", &DimensionlessConstants::alpha_K),
      cst("constants.eps_r_si", &DimensionlessConstants::eps_r_si),
      cst("constants.eps_r_ox", &DimensionlessConstants::eps_r_ox),
      {"output.snapshots", false, false, [](const C& c) { return join_doubles(c.output.snapshots); },
       [](C& c, const std::string& v) { c.output.snapshots = parse_doubles("output.snapshots", v); }},
      {"output.slices", false, false, [](const C& c) { return format_points(c.output.slices, c.two_d()); },
       [](C& c, const std::string& v) { c.output.slices = parse_points("output.slices", v, c.two_d()); }},
      {"output.cartesian", false, false, [](const C& c) { return std::string(c.output.cartesian ? "true" : "false"); },
       [](C& c, const std::string& v) { c.output.cartesian = parse_bool("output.cartesian", v); }},
      {"output.checkpoint", false, false, [](const C& c) { return std::string(c.output.checkpoint ? "true" : "false"); },
       [](C& c, const std::string& v) { c.output.checkpoint = parse_bool("output.checkpoint", v); }},
  };
  return keys;
}

}  // namespace detail

// Parse INI text. The preset named by run.device supplies defaults; every
// other key overrides one field. Keys that do not exist are rejected.
inline RunConfig parse_config(std::istream& is, const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  std::string preset = "diode400";
  if (auto run = tree.get_child_optional("run"))
    if (auto d = run->get_optional<std::string>("device")) preset = *d;
  RunConfig cfg;
  try {
    cfg = preset_config(parse_preset(preset));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("run.device: ") + e.what());
  }
  std::map<std::string, const detail::ConfigKey*> index;
  for (const auto& k : detail::config_keys()) index[k.name] = &k;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw std::invalid_argument(origin + ": key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      auto it = index.find(name);
      if (it == index.end()) throw std::invalid_argument(origin + ": unknown key '" + name + "'");
      const auto* k = it->second;
      if ((k->two_d_only && !cfg.two_d()) || (k->one_d_only && cfg.two_d()))
        throw std::invalid_argument(origin + ": key '" + name + "' does not apply to device " + preset);
      k->set(cfg, value.get_value<std::string>());
    }
  }
  cfg.device.geometry = cfg.mosfet_mesh;
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  return parse_config(is, path);
}

inline std::string format_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string current;
  for (const auto& k : detail::config_keys()) {
    if ((k.two_d_only && !cfg.two_d()) || (k.one_d_only && cfg.two_d())) continue;
    const auto dot = k.name.find('.');
    const std::string section = k.name.substr(0, dot);
    if (section != current) {
      os << (current.empty() ? "" : "\n") << '[' << section << "]\n";
      current = section;
    }
    os << k.name.substr(dot + 1) << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config file " + path);
  os << format_config(cfg);
}

// FNV-1a of the canonical config text, as 16 hex digits.
inline std::string config_digest(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : format_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline StepOptions step_options(const RunConfig& cfg) {
  StepOptions o;
  o.scheme = cfg.scheme;
  o.cfl = cfg.cfl;
  o.log_every = cfg.log_every;
  return o;
}

}  // namespace bpdg
