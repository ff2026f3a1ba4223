/**
 * @file fem.hpp
 * @brief Quadratic (P2) finite element space on the terrain-following cell mesh.
 *
 * Every mesh quad (i, j) is split along the diagonal (i, j)-(i+1, j+1) into two
 * straight-sided triangles whose vertices sit at the physical points
 * (z1_i, zeta_j h(z1_i)). The P2 nodes then form a structured lattice (I, J)
 * with I in [0, 2 n1) periodic and J in [0, 2 n2]: even indices are vertices,
 * odd indices are edge midpoints. Pressures live on the vertices (P1).
 *
 * All element integrals use a degree-4 rule, exact for every bilinear form
 * assembled here, so discrete energies and loads are consistent to round-off.
 */
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "roughfilm/errors.hpp"
#include "roughfilm/geometry.hpp"
#include "roughfilm/sparse.hpp"

namespace roughfilm {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Values and physical gradients of the six P2 and three P1 shape functions at one point.
struct ShapeSample {
  double weight = 0.0;  // quadrature weight times element area
  std::array<double, 6> phi{};
  std::array<double, 6> dx{};
  std::array<double, 6> dy{};
  std::array<double, 3> psi{};
};

struct Element {
  std::array<int, 6> nodes{};     // P2 node ids: 3 vertices then midpoints of (0,1), (1,2), (2,0)
  std::array<int, 3> vertices{};  // P1 vertex ids
  std::array<Point2, 3> corners{};
  double area = 0.0;
  std::array<double, 3> gx{};  // gradients of the barycentric coordinates
  std::array<double, 3> gy{};
  double diameter = 0.0;
};

namespace detail {
// Six-point degree-4 rule on the reference triangle (weights sum to 1).
inline constexpr double kQa = 0.44594849091596488631832925388305;
inline constexpr double kQwa = 0.22338158967801146569500700843312;
inline constexpr double kQb = 0.091576213509770743459571463402202;
inline constexpr double kQwb = 0.10995174365532186763832632490021;
inline constexpr std::array<std::array<double, 3>, 6> kQuadPoints{{
    {1.0 - 2.0 * kQa, kQa, kQa},
    {kQa, 1.0 - 2.0 * kQa, kQa},
    {kQa, kQa, 1.0 - 2.0 * kQa},
    {1.0 - 2.0 * kQb, kQb, kQb},
    {kQb, 1.0 - 2.0 * kQb, kQb},
    {kQb, kQb, 1.0 - 2.0 * kQb},
}};
inline constexpr std::array<double, 6> kQuadWeights{kQwa, kQwa, kQwa, kQwb, kQwb, kQwb};
}  // namespace detail

class P2Space {
 public:
  explicit P2Space(CellMesh mesh) : mesh_(std::move(mesh)) {
    const int n1 = mesh_.n1(), n2 = mesh_.n2();
    elements_.reserve(static_cast<std::size_t>(2) * n1 * n2);
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        const int I = 2 * i, J = 2 * j;
        // Triangle (A, B, C) and (A, C, D) with A=(i,j), B=(i+1,j), C=(i+1,j+1), D=(i,j+1).
        add_element({{{I, J}, {I + 2, J}, {I + 2, J + 2}}}, {{{I + 1, J}, {I + 2, J + 1}, {I + 1, J + 1}}});
        add_element({{{I, J}, {I + 2, J + 2}, {I, J + 2}}}, {{{I + 1, J + 1}, {I + 1, J + 2}, {I, J + 1}}});
      }
    }
  }

  const CellMesh& mesh() const { return mesh_; }
  int lattice_z1() const { return 2 * mesh_.n1(); }
  int lattice_z2() const { return 2 * mesh_.n2() + 1; }
  int num_nodes() const { return lattice_z1() * lattice_z2(); }
  int num_vertices() const { return mesh_.n1() * (mesh_.n2() + 1); }
  const std::vector<Element>& elements() const { return elements_; }

  int node(int I, int J) const {
    const int ni = lattice_z1();
    return (((I % ni) + ni) % ni) * lattice_z2() + J;
  }
  int node_row(int id) const { return id % lattice_z2(); }
  int node_col(int id) const { return id / lattice_z2(); }
  int vertex(int i, int j) const { return mesh_.wrap(i) * (mesh_.n2() + 1) + j; }

  /// Physical position of lattice node (I, J), I unwrapped.
  Point2 node_position(int I, int J) const {
    auto vert = [&](int vi, int vj) { return Point2{mesh_.z1(vi), mesh_.z2(vi, vj)}; };
    const int i0 = I / 2, j0 = J / 2;
    const bool oi = I % 2 != 0, oj = J % 2 != 0;
    Point2 a = vert(i0, j0);
    if (!oi && !oj) return a;
    const Point2 b = vert(i0 + (oi ? 1 : 0), j0 + (oj ? 1 : 0));
    return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  }

  Point2 vertex_position(int i, int j) const { return {mesh_.z1(i), mesh_.z2(i, j)}; }

  /// Evaluates shape data at every quadrature point of element e.
  template <class F>
  void for_each_point(const Element& e, F&& f) const {
    for (std::size_t q = 0; q < detail::kQuadPoints.size(); ++q) {
      const auto& l = detail::kQuadPoints[q];
      f(sample(e, l, detail::kQuadWeights[q] * e.area));
    }
  }

  static ShapeSample sample(const Element& e, const std::array<double, 3>& l, double weight) {
    ShapeSample s;
    s.weight = weight;
    for (int v = 0; v < 3; ++v) {
      s.phi[v] = l[v] * (2.0 * l[v] - 1.0);
      s.dx[v] = (4.0 * l[v] - 1.0) * e.gx[v];
      s.dy[v] = (4.0 * l[v] - 1.0) * e.gy[v];
      s.psi[v] = l[v];
    }
    for (int m = 0; m < 3; ++m) {
      const int a = m, b = (m + 1) % 3;
      s.phi[3 + m] = 4.0 * l[a] * l[b];
      s.dx[3 + m] = 4.0 * (l[b] * e.gx[a] + l[a] * e.gx[b]);
      s.dy[3 + m] = 4.0 * (l[b] * e.gy[a] + l[a] * e.gy[b]);
    }
    return s;
  }

 private:
  struct LatticeIndex {
    int I;
    int J;
  };

  void add_element(std::array<LatticeIndex, 3> corners, std::array<LatticeIndex, 3> mids) {
    Element e;
    for (int v = 0; v < 3; ++v) {
      e.nodes[v] = node(corners[v].I, corners[v].J);
      e.nodes[3 + v] = node(mids[v].I, mids[v].J);
      e.vertices[v] = vertex(corners[v].I / 2, corners[v].J / 2);
      e.corners[v] = node_position(corners[v].I, corners[v].J);
    }
    const auto& p = e.corners;
    const double det = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
    if (!(det > 0.0)) throw Error(ErrorCode::BadResolution, "degenerate or inverted cell element");
    e.area = 0.5 * det;
    for (int v = 0; v < 3; ++v) {
      const Point2& q1 = p[(v + 1) % 3];
      const Point2& q2 = p[(v + 2) % 3];
      e.gx[v] = (q1.y - q2.y) / det;
      e.gy[v] = (q2.x - q1.x) / det;
    }
    for (int v = 0; v < 3; ++v) {
      const Point2& q1 = p[v];
      const Point2& q2 = p[(v + 1) % 3];
      e.diameter = std::max(e.diameter, std::hypot(q2.x - q1.x, q2.y - q1.y));
    }
    elements_.push_back(e);
  }

  CellMesh mesh_;
  std::vector<Element> elements_;
};

/// Lattice-to-unknown numbering; nodes on constrained rows get -1.
struct DofMap {
  std::vector<int> dof;
  int count = 0;

  /// Constrains the bottom row, and the top row too when top_constrained is set.
  static DofMap walls(const P2Space& space, bool top_constrained) {
    DofMap m;
    m.dof.assign(space.num_nodes(), -1);
    const int last = space.lattice_z2() - 1;
    for (int id = 0; id < space.num_nodes(); ++id) {
      const int J = space.node_row(id);
      if (J == 0 || (top_constrained && J == last)) continue;
      m.dof[id] = m.count++;
    }
    return m;
  }
};

/// Per-element 6x6 matrix of the lambda-scaled Dirichlet form
/// integral of lambda^2 d1(phi_a) d1(phi_b) + d2(phi_a) d2(phi_b).
inline std::array<std::array<double, 6>, 6> local_stiffness(const P2Space& space, const Element& e,
                                                            double lambda) {
  std::array<std::array<double, 6>, 6> k{};
  const double l2 = lambda * lambda;
  space.for_each_point(e, [&](const ShapeSample& s) {
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) k[a][b] += s.weight * (l2 * s.dx[a] * s.dx[b] + s.dy[a] * s.dy[b]);
  });
  return k;
}

/// Global stiffness entries between free unknowns.
inline std::vector<Triplet> assemble_stiffness(const P2Space& space, const DofMap& dofs, double lambda) {
  std::vector<Triplet> out;
  out.reserve(space.elements().size() * 36);
  for (const auto& e : space.elements()) {
    const auto k = local_stiffness(space, e, lambda);
    for (int a = 0; a < 6; ++a) {
      const int da = dofs.dof[e.nodes[a]];
      if (da < 0) continue;
      for (int b = 0; b < 6; ++b) {
        const int db = dofs.dof[e.nodes[b]];
        if (db >= 0 && k[a][b] != 0.0) out.push_back({da, db, k[a][b]});
      }
    }
  }
  return out;
}

/// Consistent P1 mass matrix on the vertices.
inline std::vector<Triplet> p1_mass(const P2Space& space) {
  std::vector<Triplet> out;
  out.reserve(space.elements().size() * 9);
  for (const auto& e : space.elements())
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) out.push_back({e.vertices[a], e.vertices[b], e.area / 12.0 * (a == b ? 2.0 : 1.0)});
  return out;
}

/// Lattice vector restricted to the free unknowns.
inline std::vector<double> restrict_to_dofs(const DofMap& dofs, std::span<const double> lattice) {
  std::vector<double> out(dofs.count, 0.0);
  for (std::size_t id = 0; id < dofs.dof.size(); ++id)
    if (dofs.dof[id] >= 0) out[dofs.dof[id]] = lattice[id];
  return out;
}

/// Unknown vector scattered back onto the lattice; constrained nodes take `fill`.
inline std::vector<double> expand_from_dofs(const DofMap& dofs, std::span<const double> values, double fill = 0.0) {
  std::vector<double> out(dofs.dof.size(), fill);
  for (std::size_t id = 0; id < dofs.dof.size(); ++id)
    if (dofs.dof[id] >= 0) out[id] = values[dofs.dof[id]];
  return out;
}

/// Integral of every P2 basis function over the cell.
inline std::vector<double> p2_load(const P2Space& space) {
  std::vector<double> f(space.num_nodes(), 0.0);
  for (const auto& e : space.elements())
    space.for_each_point(e, [&](const ShapeSample& s) {
      for (int a = 0; a < 6; ++a) f[e.nodes[a]] += s.weight * s.phi[a];
    });
  return f;
}

/// Integral of every P1 basis function over the cell.
inline std::vector<double> p1_load(const P2Space& space) {
  std::vector<double> m(space.num_vertices(), 0.0);
  for (const auto& e : space.elements())
    for (int v = 0; v < 3; ++v) m[e.vertices[v]] += e.area / 3.0;
  return m;
}

inline double p2_integral(const P2Space& space, std::span<const double> field) {
  if (static_cast<int>(field.size()) != space.num_nodes())
    throw Error(ErrorCode::ShapeMismatch, "P2 field length mismatch");
  double total = 0.0;
  for (const auto& e : space.elements())
    space.for_each_point(e, [&](const ShapeSample& s) {
      double v = 0.0;
      for (int a = 0; a < 6; ++a) v += s.phi[a] * field[e.nodes[a]];
      total += s.weight * v;
    });
  return total;
}

/// Integral of |grad_lambda f|^2 over the cell.
inline double p2_energy(const P2Space& space, double lambda, std::span<const double> field) {
  if (static_cast<int>(field.size()) != space.num_nodes())
    throw Error(ErrorCode::ShapeMismatch, "P2 field length mismatch");
  double total = 0.0;
  for (const auto& e : space.elements())
    space.for_each_point(e, [&](const ShapeSample& s) {
      double gx = 0.0, gy = 0.0;
      for (int a = 0; a < 6; ++a) {
        gx += s.dx[a] * field[e.nodes[a]];
        gy += s.dy[a] * field[e.nodes[a]];
      }
      total += s.weight * (lambda * lambda * gx * gx + gy * gy);
    });
  return total;
}

/// Interpolates a P1 vertex field onto the P2 lattice.
inline std::vector<double> p1_to_lattice(const P2Space& space, std::span<const double> vertex_values) {
  std::vector<double> out(space.num_nodes(), 0.0);
  for (const auto& e : space.elements()) {
    for (int v = 0; v < 3; ++v) out[e.nodes[v]] = vertex_values[e.vertices[v]];
    for (int m = 0; m < 3; ++m)
      out[e.nodes[3 + m]] = 0.5 * (vertex_values[e.vertices[m]] + vertex_values[e.vertices[(m + 1) % 3]]);
  }
  return out;
}

/// Nodal interpolant of f(z1, z2) on the P2 lattice.
inline std::vector<double> p2_interpolate(const P2Space& space, const std::function<double(double, double)>& f) {
  std::vector<double> out(space.num_nodes());
  for (int I = 0; I < space.lattice_z1(); ++I)
    for (int J = 0; J < space.lattice_z2(); ++J) {
      const Point2 p = space.node_position(I, J);
      out[space.node(I, J)] = f(p.x, p.y);
    }
  return out;
}

}  // namespace roughfilm
