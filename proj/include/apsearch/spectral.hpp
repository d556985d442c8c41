#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "apsearch/walk.hpp"

namespace apsearch {

// Dense routines refuse arc spaces larger than this (cubic cost).
inline constexpr std::size_t kDenseCap = 10'000;
// Membership threshold for the invariant-subspace checks.
inline constexpr double kSubspaceResidualTolerance = 1e-8;

// Explicitly assembled operators in the arc basis. These are independent of
// the block kernels in walk.hpp and serve as their oracle.
Eigen::MatrixXd dense_coin(const ArcSpace& space, const CoinSpec& coin);
Eigen::MatrixXd dense_shift(const ArcSpace& space);
// I - 2 |t_m><t_m|: phase flip on the marked node's local uniform state.
Eigen::MatrixXd dense_oracle(const ArcSpace& space, NodeId marked);
// S C, built entry by entry from grover_coin blocks and the reverse index.
Eigen::MatrixXd dense_step_matrix(const ArcSpace& space, const CoinSpec& coin);

struct EigenphaseCluster {
  double phase;
  std::size_t multiplicity;
};

struct SpectralReport {
  std::size_t dimension = 0;
  std::vector<double> eigenphases;  // ascending, in (-pi, pi]
  std::vector<EigenphaseCluster> clusters;
  double max_modulus_error = 0.0;  // max | |lambda| - 1 |
  std::size_t plus_one_dim = 0;
  // Smallest nonzero |phase|; zero with `degenerate` set when every
  // eigenvalue is +1.
  double sigma = 0.0;
  bool degenerate = false;
  // ||start - P_1 start||, zero when the start state is fixed by the walk.
  double start_residual = 0.0;
  // ||P_1 start||^2
  double start_plus_one_weight = 0.0;

  Eigen::MatrixXd plus_one_basis;  // orthonormal columns spanning the +1 eigenspace
  Eigen::VectorXd start_direction;  // normalized P_1 start; empty if P_1 start = 0

  // Projection onto X' = (+1 eigenspace)^perp + span(P_1 start).
  Eigen::VectorXd project_x_prime(const Eigen::VectorXd& v) const;
  Eigen::VectorXd project_plus_one(const Eigen::VectorXd& v) const;
};

// Throws ContractViolation unless `matrix` is orthogonal to 1e-10.
SpectralReport eigen_analysis(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& start);

Eigen::VectorXd to_vector(const WalkState& state);

struct Fact1Result {
  NodeId node;
  double residual_start;    // (a) start state outside X'
  double residual_target;   // (b) |t_m> outside X'
  double residual_closure;  // (c) max over probes of S C O_m v outside X'
  double plus_one_overlap;  // ||P_1 t_m||^2
  double x_prime_overlap;   // ||P_X' t_m||^2
  bool passed;
};

struct Fact1Report {
  SpectralReport spectrum;
  std::vector<Fact1Result> nodes;

  bool all_passed() const;
};

// Invariant-subspace checks for the unmarked walk with the full-uniform
// start. `probes` random unit vectors of X' are drawn per node from
// Rng(seed).
Fact1Report verify_fact1(const ArcSpace& space, std::span<const NodeId> marked, std::size_t probes = 10,
                         std::uint64_t seed = 1);

}  // namespace apsearch
