#include "sce/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sce/error.hpp"

namespace sce {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGLNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGLWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

}  // namespace

std::size_t Mesh::locate(double x) const {
  if (x <= 0.0) return 0;
  if (x >= R) return n - 1;
  // upper_bound gives the first edge > x; the cell is the one before it.
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::shared_ptr<const Mesh> build_mesh(double R, std::size_t n, double p) {
  if (!(R > 0.0) || !std::isfinite(R) || n < 1 || !(p >= 1.0) || !std::isfinite(p))
    throw Error(ErrorCode::InvalidMeshParams,
                "need R > 0, n >= 1, p >= 1 (got R=" + std::to_string(R) + ", n=" + std::to_string(n) +
                    ", p=" + std::to_string(p) + ")");
  auto m = std::make_shared<Mesh>();
  m->R = R;
  m->n = n;
  m->p = p;
  m->edges.resize(n + 1);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double xi = static_cast<double>(i) * R / dn;
    m->edges[i] = p == 1.0 ? xi : R * std::pow(xi / R, p);
  }
  m->edges[0] = 0.0;
  m->edges[n] = R;
  m->midpoints.resize(n);
  m->widths.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m->midpoints[i] = 0.5 * (m->edges[i] + m->edges[i + 1]);
    m->widths[i] = m->edges[i + 1] - m->edges[i];
    if (!(m->widths[i] > 0.0))
      throw Error(ErrorCode::InvalidMeshParams, "degenerate cell " + std::to_string(i) + " (grading too strong for n)");
  }
  return m;
}

double discrete_mass(const State& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.g.size(); ++i) m += s.mesh->widths[i] * s.g[i];
  return m;
}

double discrete_count(const State& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.g.size(); ++i) m += s.mesh->widths[i] * s.g[i] / s.mesh->midpoints[i];
  return m;
}

State project_initial(const std::function<double(double)>& u0, std::shared_ptr<const Mesh> mesh) {
  State s;
  s.t = 0.0;
  s.g.assign(mesh->n, 0.0);
  for (std::size_t i = 0; i < mesh->n; ++i) {
    const double a = mesh->edges[i];
    const double half = 0.5 * mesh->widths[i];
    const double c = a + half;
    double acc = 0.0;
    for (std::size_t q = 0; q < kGLNodes.size(); ++q) {
      const double x = c + half * kGLNodes[q];
      const double u = u0(x);
      if (!(u >= 0.0) || !std::isfinite(u))
        throw Error(ErrorCode::NegativeInitialData,
                    "u0(" + std::to_string(x) + ") = " + std::to_string(u) + " in cell " + std::to_string(i));
      acc += kGLWeights[q] * x * u;
    }
    // Average = (half * sum) / width = sum / 2.
    s.g[i] = 0.5 * acc;
  }
  s.mesh = std::move(mesh);
  return s;
}

}  // namespace sce
