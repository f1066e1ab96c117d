#include "neuroperf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "neuroperf/errors.hpp"

namespace neuroperf {

namespace {

struct Entry {
  std::string value;  // value text without the unit
  std::string unit;   // empty when not given
  std::size_t line = 0;
  bool used = false;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

using Entries = std::map<std::string, Entry>;

// Reads `count` numbers from the front of the raw value; the remainder is the unit.
std::vector<double> numbers(const std::string& key, Entry& e, std::size_t count, std::string_view unit) {
  auto tk = tokens(e.value);
  if (tk.size() < count) throw ConfigError(key, "expected " + std::to_string(count) + " number(s), got '" + e.value + "'");
  std::vector<double> v;
  for (std::size_t i = 0; i < count; ++i) {
    const auto d = to_double(tk[i]);
    if (!d) throw ConfigError(key, "'" + tk[i] + "' is not a number");
    v.push_back(*d);
  }
  std::string u;
  for (std::size_t i = count; i < tk.size(); ++i) u += tk[i];
  if (!u.empty()) {
    const bool dimless = unit == "-";
    if (!(u == unit || (dimless && u == "1")))
      throw ConfigError(key, "unit '" + u + "' does not match the expected unit '" + std::string(unit) + "'");
  }
  e.used = true;
  return v;
}

struct Field {
  std::string_view key;
  std::string_view unit;
  std::string_view description;
  std::function<void(RunConfig&, const std::string&, Entry&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class Getter>
Field real(std::string_view key, std::string_view unit, std::string_view desc, Getter g) {
  return {key, unit, desc,
          [g, unit](RunConfig& c, const std::string& k, Entry& e) { g(c) = numbers(k, e, 1, unit)[0]; },
          [g](const RunConfig& c) -> std::optional<std::string> {
            return fmt(g(const_cast<RunConfig&>(c)));
          }};
}

template <class Getter>
Field count(std::string_view key, std::string_view desc, Getter g) {
  return {key, "-", desc,
          [g](RunConfig& c, const std::string& k, Entry& e) {
            const double v = numbers(k, e, 1, "-")[0];
            if (v < 0 || v != std::floor(v) || v > 1e15) throw ConfigError(k, "must be a nonnegative integer");
            g(c) = static_cast<std::remove_reference_t<decltype(g(c))>>(v);
          },
          [g](const RunConfig& c) -> std::optional<std::string> {
            return std::to_string(g(const_cast<RunConfig&>(c)));
          }};
}

template <class Getter>
Field direction(std::string_view key, std::string_view desc, Getter g) {
  return {key, "-", desc,
          [g](RunConfig& c, const std::string& k, Entry& e) {
            const auto v = numbers(k, e, 2, "-");
            g(c) = Point2{v[0], v[1]};
          },
          [g](const RunConfig& c) -> std::optional<std::string> {
            const auto& o = g(const_cast<RunConfig&>(c));
            if (!o) return std::nullopt;
            return fmt(o->x) + " " + fmt(o->y);
          }};
}

template <class Getter>
Field flag(std::string_view key, std::string_view desc, Getter g) {
  return {key, "-", desc,
          [g](RunConfig& c, const std::string& k, Entry& e) {
            e.used = true;
            if (e.value == "true") g(c) = true;
            else if (e.value == "false") g(c) = false;
            else throw ConfigError(k, "expected true or false, got '" + e.value + "'");
          },
          [g](const RunConfig& c) -> std::optional<std::string> {
            return g(const_cast<RunConfig&>(c)) ? "true" : "false";
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({"mesh.kind", "-", "generated | file",
                 [](RunConfig& c, const std::string& k, Entry& e) {
                   e.used = true;
                   if (e.value == "generated") c.sim.mesh.kind = MeshSource::Kind::Generated;
                   else if (e.value == "file") c.sim.mesh.kind = MeshSource::Kind::File;
                   else throw ConfigError(k, "expected generated or file, got '" + e.value + "'");
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return c.sim.mesh.kind == MeshSource::Kind::File ? "file" : "generated";
                 }});
    v.push_back(count("mesh.nx", "cells along x (generated mesh)", [](RunConfig& c) -> std::size_t& { return c.sim.mesh.nx; }));
    v.push_back(count("mesh.ny", "cells along y (generated mesh)", [](RunConfig& c) -> std::size_t& { return c.sim.mesh.ny; }));
    v.push_back(real("mesh.lx", "m", "domain width", [](RunConfig& c) -> double& { return c.sim.mesh.lx; }));
    v.push_back(real("mesh.ly", "m", "domain height", [](RunConfig& c) -> double& { return c.sim.mesh.ly; }));
    v.push_back({"mesh.path", "-", "mesh file (kind = file)",
                 [](RunConfig& c, const std::string&, Entry& e) {
                   e.used = true;
                   c.sim.mesh.path = e.value;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (c.sim.mesh.path.empty()) return std::nullopt;
                   return c.sim.mesh.path.string();
                 }});
    v.push_back(count("discretization.degree_pressure", "polynomial degree of the pressure fields", [](RunConfig& c) -> int& { return c.sim.degree_pressure; }));
    v.push_back(count("discretization.degree_protein", "polynomial degree of u and u_tilde", [](RunConfig& c) -> int& { return c.sim.degree_protein; }));
    v.push_back(real("discretization.penalty", "-", "interior penalty constant", [](RunConfig& c) -> double& { return c.sim.penalty; }));
    v.push_back(real("time.dt", "yr", "time step (required)", [](RunConfig& c) -> double& { return c.sim.dt; }));
    v.push_back(real("time.t_final", "yr", "final time (required)", [](RunConfig& c) -> double& { return c.sim.t_final; }));
    v.push_back(count("time.max_steps", "cap on t_final / dt", [](RunConfig& c) -> std::size_t& { return c.sim.max_steps; }));
    v.push_back(real("kinetics.k0", "1/yr", "production of u", [](RunConfig& c) -> double& { return c.sim.params.k0; }));
    v.push_back(real("kinetics.k1", "1/yr", "clearance of u", [](RunConfig& c) -> double& { return c.sim.params.k1; }));
    v.push_back(real("kinetics.k1_tilde", "1/yr", "clearance of u_tilde", [](RunConfig& c) -> double& { return c.sim.params.k1_tilde; }));
    v.push_back(real("kinetics.k12", "1/yr", "conversion rate", [](RunConfig& c) -> double& { return c.sim.params.k12; }));
    v.push_back(real("kinetics.kappa0", "1/yr", "production gain per unit hypoperfusion", [](RunConfig& c) -> double& { return c.sim.params.kappa0; }));
    v.push_back(real("kinetics.kappa1", "1/yr", "clearance loss of u per unit hypoperfusion", [](RunConfig& c) -> double& { return c.sim.params.kappa1; }));
    v.push_back(real("kinetics.kappa1_tilde", "1/yr", "clearance loss of u_tilde per unit hypoperfusion", [](RunConfig& c) -> double& { return c.sim.params.kappa1_tilde; }));
    v.push_back(real("kinetics.rate_floor", "1/yr", "lower bound on modulated clearance rates", [](RunConfig& c) -> double& { return c.sim.params.rate_floor; }));
    v.push_back(real("diffusion.d_ext", "mm2/yr", "isotropic diffusivity", [](RunConfig& c) -> double& { return c.sim.params.d_ext; }));
    v.push_back(real("diffusion.d_axn", "mm2/yr", "axonal diffusivity", [](RunConfig& c) -> double& { return c.sim.params.d_axn; }));
    v.push_back(direction("diffusion.axon_direction", "constant axon direction", [](RunConfig& c) -> std::optional<Point2>& { return c.sim.axon_direction; }));
    v.push_back(real("perfusion.k_A", "mm2/(Pa*s)", "arterial permeability", [](RunConfig& c) -> double& { return c.sim.params.k_A; }));
    v.push_back(real("perfusion.k_V", "mm2/(Pa*s)", "venous permeability", [](RunConfig& c) -> double& { return c.sim.params.k_V; }));
    v.push_back(real("perfusion.k_C", "mm2/(Pa*s)", "capillary permeability", [](RunConfig& c) -> double& { return c.sim.params.k_C; }));
    v.push_back(real("perfusion.k_C_ab", "mm2/(Pa*s)", "constricted capillary permeability", [](RunConfig& c) -> double& { return c.sim.params.k_C_ab; }));
    v.push_back(real("perfusion.beta_AC", "1/(Pa*s)", "arterial-capillary transfer", [](RunConfig& c) -> double& { return c.sim.params.beta_AC; }));
    v.push_back(real("perfusion.beta_CV", "1/(Pa*s)", "capillary-venous transfer", [](RunConfig& c) -> double& { return c.sim.params.beta_CV; }));
    v.push_back(real("perfusion.beta_AC_ab", "1/(Pa*s)", "constricted arterial-capillary transfer", [](RunConfig& c) -> double& { return c.sim.params.beta_AC_ab; }));
    v.push_back(real("perfusion.beta_CV_ab", "1/(Pa*s)", "constricted capillary-venous transfer", [](RunConfig& c) -> double& { return c.sim.params.beta_CV_ab; }));
    v.push_back(real("perfusion.alpha_kC", "-", "constriction steepness of k_C", [](RunConfig& c) -> double& { return c.sim.params.alpha_kC; }));
    v.push_back(real("perfusion.alpha_beta_AC", "-", "constriction steepness of beta_AC", [](RunConfig& c) -> double& { return c.sim.params.alpha_beta_AC; }));
    v.push_back(real("perfusion.alpha_beta_CV", "-", "constriction steepness of beta_CV", [](RunConfig& c) -> double& { return c.sim.params.alpha_beta_CV; }));
    v.push_back(real("perfusion.p_arteries", "mmHg", "arterial boundary pressure", [](RunConfig& c) -> double& { return c.sim.params.p_arteries; }));
    v.push_back(real("perfusion.p_veins", "mmHg", "venous boundary pressure", [](RunConfig& c) -> double& { return c.sim.params.p_veins; }));
    v.push_back(real("perfusion.rho", "kg/m3", "tissue density", [](RunConfig& c) -> double& { return c.sim.params.rho; }));
    v.push_back(direction("perfusion.fibre_direction", "constant vessel direction for K_A and K_V", [](RunConfig& c) -> std::optional<Point2>& { return c.sim.perfusion_fibre; }));
    v.push_back({"perfusion.dirichlet", "-", "boundary tags carrying pressure data (pial, vent)",
                 [](RunConfig& c, const std::string& k, Entry& e) {
                   e.used = true;
                   c.sim.dirichlet_tags.clear();
                   for (const auto& t : tokens(e.value)) {
                     const auto tag = parse_boundary_tag(t);
                     if (!tag) throw ConfigError(k, "unknown boundary tag '" + t + "'");
                     c.sim.dirichlet_tags.push_back(*tag);
                   }
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   std::string s;
                   for (auto t : c.sim.dirichlet_tags) s += (s.empty() ? "" : ", ") + std::string(to_string(t));
                   return s;
                 }});
    v.push_back(real("initial.u0", "-", "initial u", [](RunConfig& c) -> double& { return c.sim.initial.u0; }));
    v.push_back(real("initial.ut0", "-", "initial u_tilde outside seeds", [](RunConfig& c) -> double& { return c.sim.initial.ut0; }));
    v.push_back({"solver.kind", "-", "direct | cg",
                 [](RunConfig& c, const std::string& k, Entry& e) {
                   e.used = true;
                   if (e.value == "direct") c.sim.solver.kind = SolverOptions::Kind::Direct;
                   else if (e.value == "cg") c.sim.solver.kind = SolverOptions::Kind::CG;
                   else throw ConfigError(k, "expected direct or cg, got '" + e.value + "'");
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return c.sim.solver.kind == SolverOptions::Kind::CG ? "cg" : "direct";
                 }});
    v.push_back(real("solver.tol", "-", "CG relative residual tolerance", [](RunConfig& c) -> double& { return c.sim.solver.tol; }));
    v.push_back({"output.dir", "-", "output directory",
                 [](RunConfig& c, const std::string&, Entry& e) {
                   e.used = true;
                   c.output.dir = e.value;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.output.dir.string(); }});
    v.push_back(real("output.snapshot_every", "yr", "snapshot cadence; 0 disables", [](RunConfig& c) -> double& { return c.sim.snapshot_every; }));
    v.push_back(flag("output.vtk", "write VTK snapshots", [](RunConfig& c) -> bool& { return c.output.vtk; }));
    v.push_back(flag("output.point_data", "add per-vertex data", [](RunConfig& c) -> bool& { return c.output.point_data; }));
    return v;
  }();
  return f;
}

const ConfigKeyDoc kIndexedDocs[] = {
    {"seed.N.center", "m", "disk centre 'x y'; omit with radius_sq for the whole domain"},
    {"seed.N.radius_sq", "m2", "squared disk radius"},
    {"seed.N.amplitude", "-", "u_tilde inside the seed (required)"},
    {"injury.N.center", "m", "disk centre 'x y'; omit with radius_sq for the whole domain"},
    {"injury.N.radius_sq", "m2", "squared disk radius"},
    {"injury.N.beta_AC", "1/(Pa*s)", "replaces perfusion.beta_AC inside the region"},
    {"injury.N.beta_CV", "1/(Pa*s)", "replaces perfusion.beta_CV inside the region"},
    {"injury.N.k_C", "mm2/(Pa*s)", "replaces perfusion.k_C inside the region"},
    {"injury.N.k_C_scale", "-", "multiplies k_C inside the region"},
};

std::string_view indexed_unit(std::string_view group, std::string_view name) {
  for (const auto& d : kIndexedDocs) {
    const std::string k(d.key);
    if (k.starts_with(std::string(group) + ".N.") && k.substr(group.size() + 3) == name) return d.unit;
  }
  return {};
}

Entries read_entries(std::string_view text) {
  Entries out;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (value.empty()) throw ConfigError(key, "empty value (line " + std::to_string(lineno) + ")");
    if (out.count(key)) throw ConfigError(key, "duplicate key (line " + std::to_string(lineno) + ")");
    out[key] = Entry{value, {}, lineno, false};
  }
  return out;
}

// Splits "group.N.name"; returns false if the key is not of that shape.
bool split_indexed(const std::string& key, std::string& group, std::size_t& index, std::string& name) {
  const auto d1 = key.find('.');
  if (d1 == std::string::npos) return false;
  const auto d2 = key.find('.', d1 + 1);
  if (d2 == std::string::npos) return false;
  group = key.substr(0, d1);
  const std::string idx = key.substr(d1 + 1, d2 - d1 - 1);
  name = key.substr(d2 + 1);
  if (group != "seed" && group != "injury") return false;
  if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos || idx.size() > 6) return false;
  index = std::stoul(idx);
  return true;
}

SubdomainSpec region_from(Entries& es, const std::string& prefix) {
  auto c = es.find(prefix + "center");
  auto r = es.find(prefix + "radius_sq");
  if (c == es.end() && r == es.end()) return SubdomainSpec::whole();
  if (c == es.end()) throw ConfigError(prefix + "center", "required when radius_sq is given");
  if (r == es.end()) throw ConfigError(prefix + "radius_sq", "required when center is given");
  const auto cv = numbers(c->first, c->second, 2, "m");
  const double rs = numbers(r->first, r->second, 1, "m2")[0];
  if (!(rs > 0.0)) throw ConfigError(r->first, "must be positive");
  return SubdomainSpec::disk({cv[0], cv[1]}, rs);
}

}  // namespace

std::span<const ConfigKeyDoc> config_key_docs() {
  static const std::vector<ConfigKeyDoc> docs = [] {
    std::vector<ConfigKeyDoc> d;
    for (const auto& f : fields()) d.push_back({f.key, f.unit, f.description});
    for (const auto& k : kIndexedDocs) d.push_back(k);
    return d;
  }();
  return docs;
}

RunConfig parse_config_string(std::string_view text, const std::filesystem::path& base_dir) {
  Entries es = read_entries(text);
  for (const char* req : {"time.dt", "time.t_final"})
    if (!es.count(req)) throw ConfigError(req, "missing required key");

  RunConfig c;
  for (const auto& f : fields()) {
    auto it = es.find(std::string(f.key));
    if (it != es.end()) f.set(c, it->first, it->second);
  }

  std::map<std::size_t, bool> seed_ids, injury_ids;
  for (auto& [key, e] : es) {
    if (e.used) continue;
    std::string group, name;
    std::size_t idx = 0;
    if (!split_indexed(key, group, idx, name) || indexed_unit(group, name).empty())
      throw ConfigError(key, "unknown key (line " + std::to_string(e.line) + ")");
    (group == "seed" ? seed_ids : injury_ids)[idx] = true;
  }
  for (const auto& [i, _] : seed_ids) {
    const std::string p = "seed." + std::to_string(i) + ".";
    SeedSpec s;
    s.region = region_from(es, p);
    auto a = es.find(p + "amplitude");
    if (a == es.end()) throw ConfigError(p + "amplitude", "missing required key");
    s.amplitude = numbers(a->first, a->second, 1, "-")[0];
    if (!(s.amplitude >= 0.0)) throw ConfigError(a->first, "must be nonnegative");
    c.sim.initial.seeds.push_back(s);
  }
  for (const auto& [i, _] : injury_ids) {
    const std::string p = "injury." + std::to_string(i) + ".";
    InjurySpec inj;
    inj.region = region_from(es, p);
    auto opt = [&](const char* name, std::optional<double>& dst) {
      auto it = es.find(p + name);
      if (it != es.end()) dst = numbers(it->first, it->second, 1, indexed_unit("injury", name))[0];
    };
    opt("beta_AC", inj.beta_AC);
    opt("beta_CV", inj.beta_CV);
    opt("k_C", inj.k_C);
    if (auto it = es.find(p + "k_C_scale"); it != es.end()) inj.k_C_scale = numbers(it->first, it->second, 1, "-")[0];
    c.sim.injuries.push_back(inj);
  }
  for (const auto& [key, e] : es)
    if (!e.used) throw ConfigError(key, "unknown key (line " + std::to_string(e.line) + ")");

  if (c.sim.mesh.kind == MeshSource::Kind::File) {
    if (c.sim.mesh.path.empty()) throw ConfigError("mesh.path", "required when mesh.kind = file");
    if (c.sim.mesh.path.is_relative() && !base_dir.empty()) c.sim.mesh.path = base_dir / c.sim.mesh.path;
  }
  c.sim.validate();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.parent_path());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    const auto v = f.get(c);
    if (!v) continue;
    const std::string key(f.key);
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) os << '\n';
      section = sec;
    }
    os << key << " = " << *v;
    if (f.unit != "-") os << ' ' << f.unit;
    os << '\n';
  }
  auto region = [&os](const std::string& p, const SubdomainSpec& r) {
    if (r.kind != SubdomainSpec::Kind::Disk) return;
    os << p << "center = " << fmt(r.center.x) << ' ' << fmt(r.center.y) << " m\n";
    os << p << "radius_sq = " << fmt(r.radius_sq) << " m2\n";
  };
  for (std::size_t i = 0; i < c.sim.initial.seeds.size(); ++i) {
    const std::string p = "seed." + std::to_string(i) + ".";
    os << '\n';
    region(p, c.sim.initial.seeds[i].region);
    os << p << "amplitude = " << fmt(c.sim.initial.seeds[i].amplitude) << '\n';
  }
  for (std::size_t i = 0; i < c.sim.injuries.size(); ++i) {
    const auto& inj = c.sim.injuries[i];
    const std::string p = "injury." + std::to_string(i) + ".";
    os << '\n';
    region(p, inj.region);
    if (inj.beta_AC) os << p << "beta_AC = " << fmt(*inj.beta_AC) << " 1/(Pa*s)\n";
    if (inj.beta_CV) os << p << "beta_CV = " << fmt(*inj.beta_CV) << " 1/(Pa*s)\n";
    if (inj.k_C) os << p << "k_C = " << fmt(*inj.k_C) << " mm2/(Pa*s)\n";
    os << p << "k_C_scale = " << fmt(inj.k_C_scale) << '\n';
  }
  return os.str();
}

}  // namespace neuroperf
