#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "neuroperf/geometry.hpp"

namespace neuroperf {

enum class BoundaryTag { Pial, Vent };

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> parse_boundary_tag(std::string_view text);

using Triangle = std::array<std::size_t, 3>;

// Local face f of a triangle joins local vertices f and (f + 1) % 3.
inline constexpr std::array<std::size_t, 2> local_face_vertices(std::size_t f) {
  return {f, (f + 1) % 3};
}

struct InteriorFace {
  std::size_t elem_plus = 0;
  std::size_t elem_minus = 0;
  std::size_t face_plus = 0;
  std::size_t face_minus = 0;
  Point2 normal;  // unit, points from elem_plus into elem_minus
  double length = 0.0;
};

struct BoundaryFace {
  std::size_t elem = 0;
  std::size_t face = 0;
  Point2 normal;  // unit outward
  double length = 0.0;
  BoundaryTag tag = BoundaryTag::Pial;
};

// Per-element face reference: either an interior face (as plus or minus side) or a boundary face.
struct ElementFace {
  enum class Kind { InteriorPlus, InteriorMinus, Boundary } kind;
  std::size_t index;  // into interior_faces() or boundary_faces()
};

// Conforming 2D triangulation with face connectivity. Immutable after construction.
class Mesh {
 public:
  struct BoundaryTagEntry {
    std::size_t elem;
    std::size_t face;
    BoundaryTag tag;
  };

  // Builds connectivity and validates: positive orientation, every face shared by at most
  // two elements, every boundary face tagged exactly once. Throws ValidationError.
  Mesh(std::vector<Point2> vertices, std::vector<Triangle> elements,
       const std::vector<BoundaryTagEntry>& tags);

  // Same, tagging every boundary face with `default_tag`.
  Mesh(std::vector<Point2> vertices, std::vector<Triangle> elements, BoundaryTag default_tag);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& elements() const { return elements_; }
  const std::vector<InteriorFace>& interior_faces() const { return interior_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return interior_.size() + boundary_.size(); }

  double area(std::size_t e) const { return areas_[e]; }
  double diameter(std::size_t e) const { return diameters_[e]; }
  double max_diameter() const;
  double total_area() const;
  Point2 centroid(std::size_t e) const;
  std::array<Point2, 3> corners(std::size_t e) const;

  // Faces of element e ordered: interior faces by ascending global index, then boundary faces.
  const std::vector<ElementFace>& faces_of(std::size_t e) const { return element_faces_[e]; }

  // Axis-aligned bounding box (min, max).
  std::pair<Point2, Point2> bounding_box() const;

 private:
  void build(const std::vector<BoundaryTagEntry>* tags, BoundaryTag default_tag);

  std::vector<Point2> vertices_;
  std::vector<Triangle> elements_;
  std::vector<InteriorFace> interior_;
  std::vector<BoundaryFace> boundary_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
  std::vector<std::vector<ElementFace>> element_faces_;
};

// Structured triangulation of (0,lx)x(0,ly): nx*ny cells, each split into two triangles with
// the diagonal direction alternating in a checkerboard. All boundary faces are tagged Pial.
Mesh generate_rect_mesh(std::size_t nx, std::size_t ny, double lx, double ly);

// Plain-text format:
//   dgmesh 1
//   vertices N    followed by N lines "x y"
//   elements M    followed by M lines "v0 v1 v2"
//   boundary K    followed by K lines "elem localface tag"  (tag: pial | vent)
// '#' starts a comment. Parse failures throw ParseError, connectivity problems ValidationError.
Mesh load_mesh(const std::filesystem::path& path);
Mesh read_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

struct SubdomainSpec {
  enum class Kind { Disk, Whole };
  Kind kind = Kind::Whole;
  Point2 center;
  double radius_sq = 0.0;  // threshold on squared distance (strict)

  static SubdomainSpec whole() { return {}; }
  // Throws std::invalid_argument if radius_sq <= 0.
  static SubdomainSpec disk(Point2 center, double radius_sq);

  bool contains(Point2 p) const;
  friend bool operator==(const SubdomainSpec&, const SubdomainSpec&) = default;
};

inline bool indicator(const SubdomainSpec& spec, Point2 p) { return spec.contains(p); }

}  // namespace neuroperf
