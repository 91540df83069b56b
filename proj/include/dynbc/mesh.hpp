#ifndef DYNBC_MESH_HPP
#define DYNBC_MESH_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace dynbc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;
using Edge = std::array<std::size_t, 2>;

struct MeshMetrics {
  double h = 0.0;        // max edge length over all triangles
  double h_gamma = 0.0;  // max boundary edge length
  double theta = 0.0;    // max circumradius / inradius
};

/// 2D triangulation with boundary-last node ordering.
///
/// The last `n_gamma` nodes are exactly the boundary nodes, and
/// `boundary_edges` traces them as one closed counter-clockwise cycle.
/// Surface quantities use the boundary-local numbering
/// `node - first_boundary()`.
struct Mesh {
  std::vector<Point> nodes;
  std::vector<Triangle> triangles;
  std::vector<Edge> boundary_edges;
  std::size_t n_omega = 0;
  std::size_t n_gamma = 0;
  MeshMetrics metrics;

  std::size_t n_interior() const noexcept { return n_omega - n_gamma; }
  std::size_t first_boundary() const noexcept { return n_omega - n_gamma; }
  bool is_boundary(std::size_t node) const noexcept { return node >= first_boundary(); }
};

/// Result of a node renumbering: `new_index[old] == new`.
struct Reordering {
  Mesh mesh;
  std::vector<std::size_t> new_index;
};

double signed_area(const Point& a, const Point& b, const Point& c);
double triangle_area(const Mesh& mesh, std::size_t t);
double total_area(const Mesh& mesh);
double boundary_length(const Mesh& mesh);

/// Unit disk by concentric rings of spacing ~ target_h * sqrt(3)/2.
Mesh generate_disk_mesh(double target_h);

/// Unit square, n x n cells, each split into four triangles by its diagonals.
Mesh generate_crisscross_square(std::size_t n);

/// Builds a validated mesh from raw connectivity. Clockwise triangles are
/// reoriented, the boundary cycle is derived from the triangles when
/// `boundary_edges` is empty, and nodes are renumbered boundary-last.
Reordering build_mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
                      std::vector<Edge> boundary_edges);

/// Stable boundary-last renumbering; idempotent on an already ordered mesh.
Reordering reorder_boundary_last(const Mesh& mesh);

MeshMetrics mesh_metrics(const Mesh& mesh);

/// Throws InvariantError naming the first violated invariant.
void validate_mesh(const Mesh& mesh);

Mesh read_mesh(std::istream& is);
Reordering read_mesh_with_map(std::istream& is);
Mesh load_mesh(const std::filesystem::path& path);
Reordering load_mesh_with_map(const std::filesystem::path& path);
void write_mesh(std::ostream& os, const Mesh& mesh);
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace dynbc

#endif
