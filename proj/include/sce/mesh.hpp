#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace sce {

/// Graded mesh on [0, R]: edges x_i = R (i/n)^p, i = 0..n.
struct Mesh {
  double R = 0.0;
  std::size_t n = 0;
  double p = 1.0;
  std::vector<double> edges;
  std::vector<double> midpoints;
  std::vector<double> widths;

  std::size_t size() const noexcept { return n; }

  /// Index of the cell containing x (x in [edges[i], edges[i+1])); n-1 for x >= R.
  std::size_t locate(double x) const;
};

/// Throws Error{InvalidMeshParams} unless R > 0, n >= 1, p >= 1.
std::shared_ptr<const Mesh> build_mesh(double R, std::size_t n, double p);

/// Cell averages of the conservative variable g = x u at time t.
struct State {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> g;
  double t = 0.0;

  std::size_t size() const noexcept { return g.size(); }
  /// Cell value of u = g / x at the midpoint.
  double u(std::size_t i) const { return g[i] / mesh->midpoints[i]; }
};

/// Sum of widths[i] * g[i].
double discrete_mass(const State& s);

/// Number density sum of widths[i] * g[i] / mid[i].
double discrete_count(const State& s);

/// Projects x u0(x) onto cell averages with 5-point Gauss-Legendre per cell.
/// Throws Error{NegativeInitialData} if u0 is negative (or non-finite) at a node.
State project_initial(const std::function<double(double)>& u0, std::shared_ptr<const Mesh> mesh);

}  // namespace sce
