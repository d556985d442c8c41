#pragma once

// Test-only brute-force reference for the coined walk. Works on plain
// row-major matrices assembled straight from the operator definitions
// (Grover blocks, flip-flop swap, -1 on the marked block) and evolves by
// full matrix-vector products. Shares nothing with the block kernels or with
// the library's dense assembly beyond the graph's adjacency lists.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "apsearch/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Vector = std::vector<double>;

struct Basis {
  std::vector<std::pair<apsearch::NodeId, apsearch::NodeId>> arcs;  // (tail, head)
  std::map<std::pair<apsearch::NodeId, apsearch::NodeId>, std::size_t> index;
  std::vector<int> generation_of_tail;
  int last_generation = 0;
};

inline Basis make_basis(const apsearch::ApollonianGraph& g) {
  Basis b;
  b.last_generation = g.generation();
  for (apsearch::NodeId i = 0; i < g.node_count(); ++i) {
    for (apsearch::NodeId j : g.neighbors(i)) {
      b.index[{i, j}] = b.arcs.size();
      b.arcs.emplace_back(i, j);
      b.generation_of_tail.push_back(g.node_generation(i));
    }
  }
  return b;
}

inline Matrix walk_matrix(const apsearch::ApollonianGraph& g, const Basis& b,
                          std::optional<apsearch::NodeId> marked) {
  const std::size_t n = b.arcs.size();
  Matrix coin(n, Vector(n, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (b.arcs[r].first != b.arcs[c].first) continue;
      const auto node = b.arcs[r].first;
      const double d = static_cast<double>(g.degree(node));
      double v = 2.0 / d - (r == c ? 1.0 : 0.0);
      if (marked && *marked == node) v = -v;
      coin[r][c] = v;
    }
  }
  Matrix shift(n, Vector(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    const auto [i, j] = b.arcs[c];
    shift[b.index.at({j, i})][c] = 1.0;
  }
  Matrix u(n, Vector(n, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k)
      if (shift[r][k] != 0.0)
        for (std::size_t c = 0; c < n; ++c) u[r][c] += shift[r][k] * coin[k][c];
  return u;
}

inline Vector multiply(const Matrix& m, const Vector& v) {
  Vector out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
  return out;
}

inline Vector uniform_on(const Basis& b, bool last_only) {
  Vector v(b.arcs.size(), 0.0);
  double count = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (!last_only || b.generation_of_tail[a] == b.last_generation) {
      v[a] = 1.0;
      count += 1.0;
    }
  }
  for (double& x : v) x /= std::sqrt(count);
  return v;
}

struct Point {
  double p_marked;
  double p_subspace;
};

inline Point measure(const Basis& b, const Vector& v, apsearch::NodeId marked) {
  Point p{0.0, 0.0};
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (b.arcs[a].first == marked) p.p_marked += v[a] * v[a];
    if (b.generation_of_tail[a] == b.last_generation) p.p_subspace += v[a] * v[a];
  }
  return p;
}

inline std::vector<Point> trace(const apsearch::ApollonianGraph& g, apsearch::NodeId marked, bool last_init,
                                std::size_t steps) {
  const Basis b = make_basis(g);
  const Matrix u = walk_matrix(g, b, marked);
  Vector v = uniform_on(b, last_init);
  std::vector<Point> out{measure(b, v, marked)};
  for (std::size_t t = 0; t < steps; ++t) {
    v = multiply(u, v);
    out.push_back(measure(b, v, marked));
  }
  return out;
}

}  // namespace oracle
