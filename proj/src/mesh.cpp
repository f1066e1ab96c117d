#include "neuroperf/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "neuroperf/errors.hpp"

namespace neuroperf {

std::string_view to_string(BoundaryTag tag) { return tag == BoundaryTag::Pial ? "pial" : "vent"; }

std::optional<BoundaryTag> parse_boundary_tag(std::string_view text) {
  if (text == "pial") return BoundaryTag::Pial;
  if (text == "vent") return BoundaryTag::Vent;
  return std::nullopt;
}

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> elements,
           const std::vector<BoundaryTagEntry>& tags)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  build(&tags, BoundaryTag::Pial);
}

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> elements, BoundaryTag default_tag)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  build(nullptr, default_tag);
}

void Mesh::build(const std::vector<BoundaryTagEntry>* tags, BoundaryTag default_tag) {
  if (elements_.empty()) throw ValidationError("mesh has no elements");
  const std::size_t ne = elements_.size();
  areas_.resize(ne);
  diameters_.resize(ne);

  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t v : elements_[e]) {
      if (v >= vertices_.size())
        throw ValidationError("element " + std::to_string(e) + " references vertex " +
                              std::to_string(v) + " which does not exist");
    }
    const auto c = corners(e);
    const double signed_area = 0.5 * cross(c[1] - c[0], c[2] - c[0]);
    if (!(signed_area > 0.0))
      throw ValidationError("element " + std::to_string(e) + " is not positively oriented");
    areas_[e] = signed_area;
    diameters_[e] = std::max({norm(c[1] - c[0]), norm(c[2] - c[1]), norm(c[0] - c[2])});
  }

  // Edge key (min vertex, max vertex) -> incident (element, local face) pairs.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>>
      edges;
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t f = 0; f < 3; ++f) {
      const auto [a, b] = local_face_vertices(f);
      std::size_t va = elements_[e][a], vb = elements_[e][b];
      if (va == vb) throw ValidationError("degenerate edge in element " + std::to_string(e));
      edges[{std::min(va, vb), std::max(va, vb)}].emplace_back(e, f);
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, BoundaryTag> tag_of;
  if (tags) {
    for (const auto& t : *tags) {
      if (t.elem >= ne || t.face > 2)
        throw ValidationError("boundary tag refers to nonexistent face (" +
                              std::to_string(t.elem) + ", " + std::to_string(t.face) + ")");
      if (!tag_of.emplace(std::pair{t.elem, t.face}, t.tag).second)
        throw ValidationError("boundary face (" + std::to_string(t.elem) + ", " +
                              std::to_string(t.face) + ") tagged twice");
    }
  }

  auto outward_normal = [&](std::size_t e, std::size_t f) {
    const auto [a, b] = local_face_vertices(f);
    const Point2 d = vertices_[elements_[e][b]] - vertices_[elements_[e][a]];
    const double len = norm(d);
    return std::pair{Point2{d.y / len, -d.x / len}, len};
  };

  std::size_t tagged_used = 0;
  for (const auto& [key, incident] : edges) {
    if (incident.size() > 2)
      throw ValidationError("edge (" + std::to_string(key.first) + ", " +
                            std::to_string(key.second) + ") is shared by " +
                            std::to_string(incident.size()) + " elements");
    if (incident.size() == 2) {
      auto [ep, fp] = incident[0];
      auto [em, fm] = incident[1];
      if (ep > em) {
        std::swap(ep, em);
        std::swap(fp, fm);
      }
      if (ep == em) throw ValidationError("element " + std::to_string(ep) + " repeats an edge");
      if (tag_of.count({ep, fp}) || tag_of.count({em, fm}))
        throw ValidationError("interior face of element " + std::to_string(ep) +
                              " carries a boundary tag");
      const auto [n, len] = outward_normal(ep, fp);
      interior_.push_back({ep, em, fp, fm, n, len});
    } else {
      const auto [e, f] = incident[0];
      BoundaryTag tag = default_tag;
      if (tags) {
        auto it = tag_of.find({e, f});
        if (it == tag_of.end())
          throw ValidationError("boundary face (" + std::to_string(e) + ", " + std::to_string(f) +
                                ") has no tag");
        tag = it->second;
        ++tagged_used;
      }
      const auto [n, len] = outward_normal(e, f);
      boundary_.push_back({e, f, n, len, tag});
    }
  }
  if (tags && tagged_used != tag_of.size())
    throw ValidationError("boundary section lists faces that are not on the boundary");

  // Deterministic face order: sort by (plus element, local face) so that the ordering does not
  // depend on vertex numbering.
  std::sort(interior_.begin(), interior_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.elem_plus, a.face_plus) < std::tie(b.elem_plus, b.face_plus);
  });
  std::sort(boundary_.begin(), boundary_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.elem, a.face) < std::tie(b.elem, b.face);
  });

  element_faces_.assign(ne, {});
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    element_faces_[interior_[i].elem_plus].push_back({ElementFace::Kind::InteriorPlus, i});
    element_faces_[interior_[i].elem_minus].push_back({ElementFace::Kind::InteriorMinus, i});
  }
  for (std::size_t i = 0; i < boundary_.size(); ++i)
    element_faces_[boundary_[i].elem].push_back({ElementFace::Kind::Boundary, i});
}

double Mesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

std::array<Point2, 3> Mesh::corners(std::size_t e) const {
  const auto& t = elements_[e];
  return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

Point2 Mesh::centroid(std::size_t e) const {
  const auto c = corners(e);
  return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

std::pair<Point2, Point2> Mesh::bounding_box() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Point2 lo{inf, inf}, hi{-inf, -inf};
  for (const auto& v : vertices_) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  return {lo, hi};
}

Mesh generate_rect_mesh(std::size_t nx, std::size_t ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("generate_rect_mesh: nx and ny must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("generate_rect_mesh: domain lengths must be positive");

  std::vector<Point2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      vertices.push_back({lx * static_cast<double>(i) / static_cast<double>(nx),
                          ly * static_cast<double>(j) / static_cast<double>(ny)});

  auto vid = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<Triangle> elements;
  elements.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
                        v11 = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        elements.push_back({v00, v10, v11});
        elements.push_back({v00, v11, v01});
      } else {
        elements.push_back({v00, v10, v01});
        elements.push_back({v10, v11, v01});
      }
    }
  }
  return Mesh(std::move(vertices), std::move(elements), BoundaryTag::Pial);
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  // Next non-empty line with comments stripped; false at EOF.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  std::istringstream require(const char* what) {
    std::istringstream ss;
    if (!next(ss)) throw ParseError(line_no, std::string("unexpected end of file, expected ") + what);
    return ss;
  }
};

void expect_end(std::istringstream& ss, std::size_t line) {
  std::string extra;
  if (ss >> extra) throw ParseError(line, "trailing token '" + extra + "'");
}

std::size_t read_section_header(LineReader& r, const std::string& name) {
  auto ss = r.require(name.c_str());
  std::string word;
  long long count = -1;
  if (!(ss >> word) || word != name || !(ss >> count) || count < 0)
    throw ParseError(r.line_no, "expected '" + name + " <count>'");
  expect_end(ss, r.line_no);
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader r{in};
  {
    auto ss = r.require("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "dgmesh" || version != 1)
      throw ParseError(r.line_no, "expected header 'dgmesh 1'");
    expect_end(ss, r.line_no);
  }

  const std::size_t nv = read_section_header(r, "vertices");
  std::vector<Point2> vertices(nv);
  for (auto& v : vertices) {
    auto ss = r.require("vertex");
    if (!(ss >> v.x >> v.y)) throw ParseError(r.line_no, "expected vertex 'x y'");
    expect_end(ss, r.line_no);
  }

  const std::size_t ne = read_section_header(r, "elements");
  std::vector<Triangle> elements(ne);
  for (auto& t : elements) {
    auto ss = r.require("element");
    long long a = -1, b = -1, c = -1;
    if (!(ss >> a >> b >> c)) throw ParseError(r.line_no, "expected element 'v0 v1 v2'");
    for (long long v : {a, b, c}) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv)
        throw ParseError(r.line_no, "vertex index " + std::to_string(v) + " out of range");
    }
    expect_end(ss, r.line_no);
    t = {static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)};
  }

  const std::size_t nb = read_section_header(r, "boundary");
  std::vector<Mesh::BoundaryTagEntry> tags;
  tags.reserve(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    auto ss = r.require("boundary face");
    long long e = -1, f = -1;
    std::string tag_text;
    if (!(ss >> e >> f >> tag_text)) throw ParseError(r.line_no, "expected 'elem localface tag'");
    if (e < 0 || static_cast<std::size_t>(e) >= ne)
      throw ParseError(r.line_no, "element index " + std::to_string(e) + " out of range");
    if (f < 0 || f > 2) throw ParseError(r.line_no, "local face must be 0, 1 or 2");
    auto tag = parse_boundary_tag(tag_text);
    if (!tag) throw ParseError(r.line_no, "unknown boundary tag '" + tag_text + "'");
    expect_end(ss, r.line_no);
    tags.push_back({static_cast<std::size_t>(e), static_cast<std::size_t>(f), *tag});
  }
  std::istringstream rest;
  if (r.next(rest)) throw ParseError(r.line_no, "unexpected content after boundary section");

  return Mesh(std::move(vertices), std::move(elements), tags);
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "dgmesh 1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
  out << "elements " << mesh.num_elements() << '\n';
  for (const auto& t : mesh.elements()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary " << mesh.boundary_faces().size() << '\n';
  for (const auto& b : mesh.boundary_faces())
    out << b.elem << ' ' << b.face << ' ' << to_string(b.tag) << '\n';
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
  write_mesh(mesh, out);
  if (!out) throw std::runtime_error("error writing mesh file " + path.string());
}

SubdomainSpec SubdomainSpec::disk(Point2 center, double radius_sq) {
  if (!(radius_sq > 0.0)) throw std::invalid_argument("disk subdomain needs radius_sq > 0");
  return {Kind::Disk, center, radius_sq};
}

bool SubdomainSpec::contains(Point2 p) const {
  if (kind == Kind::Whole) return true;
  const Point2 d = p - center;
  return dot(d, d) < radius_sq;
}

}  // namespace neuroperf
