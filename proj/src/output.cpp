#include "neuroperf/output.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace neuroperf {

namespace {

std::string e9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

std::ofstream open_or_throw(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

const Point2 kCorners[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

}  // namespace

void write_vtk_snapshot(Simulation& sim, const SimulationState& s, std::ostream& out, bool point_data) {
  const Mesh& mesh = sim.mesh();
  const std::size_t ne = mesh.num_elements();
  sim.baseline();
  const FieldVector r = sim.cbf_reduction_field(s.pressures, s.ut);
  const struct {
    const char* name;
    const FieldVector* f;
  } arrays[] = {{"u", &s.u}, {"u_tilde", &s.ut}, {"p_A", &s.pressures.p_A}, {"p_C", &s.pressures.p_C},
                {"p_V", &s.pressures.p_V}, {"CBF_reduction", &r}};

  out << "# vtk DataFile Version 3.0\n";
  out << "neuroperf step " << s.step << " time " << e9(s.time) << " yr\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  if (point_data) {
    out << "POINTS " << 3 * ne << " double\n";
    for (std::size_t e = 0; e < ne; ++e)
      for (const auto& p : mesh.corners(e)) out << e9(p.x) << ' ' << e9(p.y) << ' ' << e9(0.0) << '\n';
  } else {
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& p : mesh.vertices()) out << e9(p.x) << ' ' << e9(p.y) << ' ' << e9(0.0) << '\n';
  }
  out << "CELLS " << ne << ' ' << 4 * ne << '\n';
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = mesh.elements()[e];
    if (point_data) out << "3 " << 3 * e << ' ' << 3 * e + 1 << ' ' << 3 * e + 2 << '\n';
    else out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << ne << '\n';
  for (std::size_t e = 0; e < ne; ++e) out << "5\n";

  out << "CELL_DATA " << ne << '\n';
  for (const auto& a : arrays) {
    out << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t e = 0; e < ne; ++e) out << e9(a.f->mean(e)) << '\n';
  }
  if (point_data) {
    out << "POINT_DATA " << 3 * ne << '\n';
    for (const auto& a : arrays) {
      out << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
      for (std::size_t e = 0; e < ne; ++e)
        for (const auto& c : kCorners) out << e9(a.f->value_at(e, c)) << '\n';
    }
  }
}

void write_vtk_snapshot(Simulation& sim, const SimulationState& state, const std::filesystem::path& path,
                        bool point_data) {
  auto out = open_or_throw(path);
  write_vtk_snapshot(sim, state, out, point_data);
  finish(out, path);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void write_timeseries_csv(std::span<const Diagnostics> rows, std::ostream& out) {
  out << "step,time_yr,mass_u,mass_util,max_util,min_u,max_cbf_reduction,classification\r\n";
  for (const auto& d : rows) {
    out << d.step << ',' << e9(d.time) << ',' << e9(d.mass_u) << ',' << e9(d.mass_ut) << ',' << e9(d.max_ut) << ','
        << e9(d.min_u) << ',' << e9(d.max_cbf_reduction) << ',' << csv_field(to_string(d.classification)) << "\r\n";
  }
}

void write_timeseries_csv(std::span<const Diagnostics> rows, const std::filesystem::path& path) {
  auto out = open_or_throw(path);
  write_timeseries_csv(rows, out);
  finish(out, path);
}

}  // namespace neuroperf
