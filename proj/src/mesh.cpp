#include "dynbc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "dynbc/error.hpp"

namespace dynbc {

namespace {

constexpr double kDegenerateRatio = 1e-14;
constexpr std::size_t kMaxNodes = 20'000'000;

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Edge sorted_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::string edge_name(const Edge& e) {
  // 1-based, as in files
  return "(" + std::to_string(e[0] + 1) + "," + std::to_string(e[1] + 1) + ")";
}

double max_edge_length(const std::vector<Point>& nodes, const std::vector<Triangle>& tris) {
  double h = 0.0;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, distance(nodes[t[k]], nodes[t[(k + 1) % 3]]));
    }
  }
  return h;
}

/// Triangles adjacent to each undirected edge.
std::map<Edge, std::vector<std::size_t>> edge_incidence(const std::vector<Triangle>& tris) {
  std::map<Edge, std::vector<std::size_t>> inc;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) inc[sorted_edge(tris[t][k], tris[t][(k + 1) % 3])].push_back(t);
  }
  return inc;
}

/// Orders boundary edges into one closed cycle oriented like the triangles
/// (interior on the left).
std::vector<Edge> boundary_cycle(const std::vector<Triangle>& tris,
                                 const std::vector<Edge>& given) {
  const auto inc = edge_incidence(tris);
  for (const auto& [e, ts] : inc) {
    if (ts.size() > 2) {
      throw InvariantError("edge " + edge_name(e) + " is shared by more than two triangles");
    }
  }

  std::vector<Edge> edges;
  if (given.empty()) {
    for (const auto& [e, ts] : inc) {
      if (ts.size() == 1) edges.push_back(e);
    }
  } else {
    std::map<std::size_t, int> degree;
    for (const auto& e : given) {
      ++degree[e[0]];
      ++degree[e[1]];
    }
    for (const auto& [node, d] : degree) {
      if (d != 2) {
        throw InvariantError("open boundary cycle at node " + std::to_string(node + 1));
      }
    }
    std::map<Edge, int> seen;
    for (const auto& e : given) {
      const Edge s = sorted_edge(e[0], e[1]);
      if (++seen[s] > 1) throw InvariantError("boundary edge " + edge_name(s) + " listed twice");
      const auto it = inc.find(s);
      if (it == inc.end()) {
        throw InvariantError("boundary edge " + edge_name(s) + " is not a triangle edge");
      }
      if (it->second.size() != 1) {
        throw InvariantError("boundary edge " + edge_name(s) + " belongs to " +
                             std::to_string(it->second.size()) + " triangles");
      }
      edges.push_back(s);
    }
    for (const auto& [e, ts] : inc) {
      if (ts.size() == 1 && !seen.count(e)) {
        throw InvariantError("triangulation edge " + edge_name(e) +
                             " lies on the boundary but is missing from the boundary list");
      }
    }
  }
  if (edges.empty()) throw InvariantError("mesh has no boundary edges");

  // orient every boundary edge as it appears in its (counter-clockwise) triangle
  std::map<std::size_t, std::size_t> next;
  for (const auto& e : edges) {
    const auto& t = tris[inc.at(e).front()];
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = t[k];
      const std::size_t b = t[(k + 1) % 3];
      if (sorted_edge(a, b) == e) {
        if (!next.emplace(a, b).second) {
          throw InvariantError("boundary is not a simple cycle at node " + std::to_string(a + 1));
        }
      }
    }
  }

  std::vector<Edge> cycle;
  cycle.reserve(edges.size());
  const std::size_t start = next.begin()->first;
  std::size_t cur = start;
  do {
    const auto it = next.find(cur);
    if (it == next.end()) {
      throw InvariantError("open boundary cycle at node " + std::to_string(cur + 1));
    }
    cycle.push_back({cur, it->second});
    cur = it->second;
  } while (cur != start && cycle.size() <= edges.size());
  if (cycle.size() != edges.size()) {
    throw InvariantError("boundary consists of more than one closed cycle");
  }
  return cycle;
}

std::size_t node_count(const Mesh& m) { return m.nodes.size(); }

}  // namespace

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double triangle_area(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  return signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
}

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) a += triangle_area(mesh, t);
  return a;
}

double boundary_length(const Mesh& mesh) {
  double l = 0.0;
  for (const auto& e : mesh.boundary_edges) l += distance(mesh.nodes[e[0]], mesh.nodes[e[1]]);
  return l;
}

MeshMetrics mesh_metrics(const Mesh& mesh) {
  MeshMetrics m;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& p0 = mesh.nodes[tri[0]];
    const Point& p1 = mesh.nodes[tri[1]];
    const Point& p2 = mesh.nodes[tri[2]];
    const double a = distance(p1, p2);
    const double b = distance(p0, p2);
    const double c = distance(p0, p1);
    const double area = std::abs(signed_area(p0, p1, p2));
    const double s = 0.5 * (a + b + c);
    if (area <= 0.0 || s <= 0.0) {
      throw InvariantError("degenerate triangle " + std::to_string(t + 1) + " (zero inradius)");
    }
    const double circumradius = a * b * c / (4.0 * area);
    const double inradius = area / s;
    m.h = std::max({m.h, a, b, c});
    m.theta = std::max(m.theta, circumradius / inradius);
  }
  for (const auto& e : mesh.boundary_edges) {
    m.h_gamma = std::max(m.h_gamma, distance(mesh.nodes[e[0]], mesh.nodes[e[1]]));
  }
  return m;
}

void validate_mesh(const Mesh& mesh) {
  const std::size_t n = node_count(mesh);
  if (mesh.n_omega != n) throw InvariantError("n_omega does not match the node count");
  if (mesh.n_gamma == 0 || mesh.n_gamma > n) throw InvariantError("invalid boundary node count");
  if (mesh.triangles.empty()) throw InvariantError("mesh has no triangles");
  for (const auto& t : mesh.triangles) {
    for (auto v : t) {
      if (v >= n) throw InvariantError("triangle references node " + std::to_string(v + 1));
    }
  }
  const double h = max_edge_length(mesh.nodes, mesh.triangles);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (triangle_area(mesh, t) <= kDegenerateRatio * h * h) {
      throw InvariantError("triangle " + std::to_string(t + 1) + " is inverted or degenerate");
    }
  }
  if (mesh.boundary_edges.size() != mesh.n_gamma) {
    throw InvariantError("boundary cycle length differs from the boundary node count");
  }
  const auto cycle = boundary_cycle(mesh.triangles, mesh.boundary_edges);
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    if (!mesh.is_boundary(cycle[k][0])) {
      throw InvariantError("boundary node " + std::to_string(cycle[k][0] + 1) +
                           " is not among the last n_gamma nodes");
    }
  }
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    const auto& f = mesh.boundary_edges[(k + 1) % mesh.boundary_edges.size()];
    if (e[1] != f[0]) throw InvariantError("boundary edges are not listed consecutively");
  }
  const MeshMetrics m = mesh_metrics(mesh);
  if (!(m.h >= m.h_gamma && m.h_gamma > 0.0)) throw InvariantError("inconsistent mesh widths");
  if (!(std::isfinite(m.theta) && m.theta >= 2.0 - 1e-12)) {
    throw InvariantError("quasi-uniformity parameter out of range");
  }
}

Reordering reorder_boundary_last(const Mesh& mesh) {
  const std::size_t n = node_count(mesh);
  std::vector<char> on_boundary(n, 0);
  for (const auto& e : mesh.boundary_edges) {
    on_boundary[e[0]] = 1;
    on_boundary[e[1]] = 1;
  }
  Reordering r;
  r.new_index.assign(n, 0);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_boundary[i]) r.new_index[i] = next++;
  }
  const std::size_t n_interior = next;
  for (std::size_t i = 0; i < n; ++i) {
    if (on_boundary[i]) r.new_index[i] = next++;
  }

  Mesh& out = r.mesh;
  out.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.nodes[r.new_index[i]] = mesh.nodes[i];
  out.triangles.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    out.triangles.push_back({r.new_index[t[0]], r.new_index[t[1]], r.new_index[t[2]]});
  }
  out.boundary_edges.reserve(mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    out.boundary_edges.push_back({r.new_index[e[0]], r.new_index[e[1]]});
  }
  out.n_omega = n;
  out.n_gamma = n - n_interior;
  out.metrics = mesh.metrics;
  return r;
}

Reordering build_mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
                      std::vector<Edge> boundary_edges) {
  const std::size_t n = nodes.size();
  for (const auto& t : triangles) {
    for (auto v : t) {
      if (v >= n) throw InvariantError("triangle references missing node " + std::to_string(v + 1));
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvariantError("triangle with repeated vertex");
    }
  }
  for (const auto& e : boundary_edges) {
    if (e[0] >= n || e[1] >= n) throw InvariantError("boundary edge references missing node");
  }
  if (triangles.empty()) throw InvariantError("mesh has no triangles");

  const double h = max_edge_length(nodes, triangles);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto& tri = triangles[t];
    const double a = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    if (std::abs(a) < kDegenerateRatio * h * h) {
      throw InvariantError("triangle " + std::to_string(t + 1) + " is degenerate");
    }
    if (a < 0.0) std::swap(tri[1], tri[2]);
  }

  Mesh raw;
  raw.boundary_edges = boundary_cycle(triangles, boundary_edges);
  raw.nodes = std::move(nodes);
  raw.triangles = std::move(triangles);
  raw.n_omega = n;

  std::vector<char> used(n, 0);
  for (const auto& t : raw.triangles) used[t[0]] = used[t[1]] = used[t[2]] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) throw InvariantError("node " + std::to_string(i + 1) + " is in no triangle");
  }

  Reordering r = reorder_boundary_last(raw);
  r.mesh.metrics = mesh_metrics(r.mesh);
  validate_mesh(r.mesh);
  return r;
}

Mesh generate_disk_mesh(double target_h) {
  if (!(target_h > 0.0 && target_h <= 1.0)) {
    throw ArgumentError("disk mesh width must lie in (0, 1]");
  }
  constexpr double pi = std::numbers::pi;
  const double ring_spacing = target_h * std::sqrt(3.0) / 2.0;
  const double rings_real = std::ceil(1.0 / ring_spacing - 1e-9);
  if (3.7 * rings_real * rings_real > static_cast<double>(kMaxNodes)) {
    throw ResourceError("disk mesh with h=" + std::to_string(target_h) + " exceeds node budget");
  }
  const auto rings = static_cast<std::size_t>(rings_real);
  const double dr = 1.0 / static_cast<double>(rings);
  const double arc = 2.0 * dr / std::sqrt(3.0);

  std::vector<Point> nodes{{0.0, 0.0}};
  std::vector<std::vector<std::size_t>> ring_nodes(rings + 1);
  std::vector<double> phase(rings + 1, 0.0);
  ring_nodes[0] = {0};
  for (std::size_t i = 1; i <= rings; ++i) {
    const double r = i == rings ? 1.0 : static_cast<double>(i) * dr;
    const auto count = std::max<std::size_t>(
        6, static_cast<std::size_t>(std::ceil(2.0 * pi * r / arc - 1e-9)));
    phase[i] = (i % 2 == 1) ? pi / static_cast<double>(count) : 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double a = phase[i] + 2.0 * pi * static_cast<double>(k) / static_cast<double>(count);
      ring_nodes[i].push_back(nodes.size());
      nodes.push_back({r * std::cos(a), r * std::sin(a)});
    }
  }

  std::vector<Triangle> tris;
  const auto& first = ring_nodes[1];
  for (std::size_t k = 0; k < first.size(); ++k) {
    tris.push_back({0, first[k], first[(k + 1) % first.size()]});
  }
  // zip consecutive rings together in order of increasing angle
  for (std::size_t i = 1; i < rings; ++i) {
    const auto& in = ring_nodes[i];
    const auto& out = ring_nodes[i + 1];
    const double a_in = 2.0 * pi / static_cast<double>(in.size());
    const double a_out = 2.0 * pi / static_cast<double>(out.size());
    const auto in_angle = [&](std::size_t k) { return phase[i] + a_in * static_cast<double>(k); };
    // outer start index: largest outer angle not exceeding the first inner angle
    const double rel = std::fmod(in_angle(0) - phase[i + 1] + 2.0 * pi, 2.0 * pi);
    const auto j0 = static_cast<std::size_t>(std::floor(rel / a_out + 1e-12)) % out.size();
    double out_base = phase[i + 1] + a_out * static_cast<double>(j0);
    if (out_base > in_angle(0) + 1e-12) out_base -= 2.0 * pi;
    const auto out_angle = [&](std::size_t k) { return out_base + a_out * static_cast<double>(k); };

    std::size_t a = 0;
    std::size_t b = 0;
    while (a < in.size() || b < out.size()) {
      const std::size_t ia = in[a % in.size()];
      const std::size_t ob = out[(j0 + b) % out.size()];
      const bool advance_inner =
          b == out.size() || (a < in.size() && in_angle(a + 1) < out_angle(b + 1));
      if (advance_inner) {
        tris.push_back({ia, ob, in[(a + 1) % in.size()]});
        ++a;
      } else {
        tris.push_back({ia, ob, out[(j0 + b + 1) % out.size()]});
        ++b;
      }
    }
  }
  return build_mesh(std::move(nodes), std::move(tris), {}).mesh;
}

Mesh generate_crisscross_square(std::size_t n) {
  if (n == 0) throw ArgumentError("criss-cross mesh needs at least one cell");
  const double d = 1.0 / static_cast<double>(n);
  std::vector<Point> nodes;
  const auto corner = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      nodes.push_back({static_cast<double>(i) * d, static_cast<double>(j) * d});
    }
  }
  std::vector<Triangle> tris;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nodes.size();
      nodes.push_back({(static_cast<double>(i) + 0.5) * d, (static_cast<double>(j) + 0.5) * d});
      const std::size_t sw = corner(i, j);
      const std::size_t se = corner(i + 1, j);
      const std::size_t ne = corner(i + 1, j + 1);
      const std::size_t nw = corner(i, j + 1);
      tris.push_back({sw, se, c});
      tris.push_back({se, ne, c});
      tris.push_back({ne, nw, c});
      tris.push_back({nw, sw, c});
    }
  }
  return build_mesh(std::move(nodes), std::move(tris), {}).mesh;
}

namespace {

struct LineReader {
  std::istream& is;
  std::size_t line_no = 0;

  /// Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  std::size_t header(const std::string& keyword) {
    std::istringstream ls;
    if (!next(ls)) throw ParseError(line_no + 1, "expected '" + keyword + " <count>'");
    std::string word;
    long long count = -1;
    if (!(ls >> word >> count) || word != keyword || count < 0) {
      throw ParseError(line_no, "expected '" + keyword + " <count>'");
    }
    return static_cast<std::size_t>(count);
  }

  template <std::size_t K>
  std::array<std::size_t, K> indices(std::size_t n_nodes) {
    std::istringstream ls;
    if (!next(ls)) throw ParseError(line_no + 1, "unexpected end of file");
    std::array<std::size_t, K> out{};
    for (std::size_t k = 0; k < K; ++k) {
      long long v = 0;
      if (!(ls >> v)) throw ParseError(line_no, "expected " + std::to_string(K) + " node indices");
      if (v < 1 || static_cast<std::size_t>(v) > n_nodes) {
        throw ParseError(line_no, "node index " + std::to_string(v) + " out of range");
      }
      out[k] = static_cast<std::size_t>(v - 1);
    }
    return out;
  }
};

}  // namespace

Reordering read_mesh_with_map(std::istream& is) {
  LineReader in{is};
  const std::size_t n = in.header("NODES");
  std::vector<Point> nodes(n);
  for (auto& p : nodes) {
    std::istringstream ls;
    if (!in.next(ls)) throw ParseError(in.line_no + 1, "unexpected end of file in NODES");
    if (!(ls >> p.x >> p.y) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ParseError(in.line_no, "expected two finite coordinates");
    }
  }
  const std::size_t m = in.header("TRIANGLES");
  std::vector<Triangle> tris(m);
  for (auto& t : tris) t = in.indices<3>(n);
  const std::size_t k = in.header("BOUNDARY");
  std::vector<Edge> edges(k);
  for (auto& e : edges) e = in.indices<2>(n);
  std::istringstream trailing;
  if (in.next(trailing)) throw ParseError(in.line_no, "unexpected trailing content");
  return build_mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Mesh read_mesh(std::istream& is) { return read_mesh_with_map(is).mesh; }

Reordering load_mesh_with_map(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ArgumentError("cannot open mesh file " + path.string());
  return read_mesh_with_map(f);
}

Mesh load_mesh(const std::filesystem::path& path) { return load_mesh_with_map(path).mesh; }

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "# boundary-last triangulation: " << mesh.n_omega << " nodes, " << mesh.n_gamma
     << " on the boundary\n";
  os << "NODES " << mesh.nodes.size() << '\n' << std::setprecision(17);
  for (const auto& p : mesh.nodes) os << p.x << ' ' << p.y << '\n';
  os << "TRIANGLES " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  os << "BOUNDARY " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) os << e[0] + 1 << ' ' << e[1] + 1 << '\n';
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream f(path);
  if (!f) throw ArgumentError("cannot write mesh file " + path.string());
  write_mesh(f, mesh);
}

}  // namespace dynbc
