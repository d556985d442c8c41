#include "apsearch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "apsearch/error.hpp"
#include "apsearch/rng.hpp"

namespace apsearch {

namespace {

// Eigenvalues of 2I - M - M^T below this count as phase zero.
constexpr double kPlusOneTolerance = 1e-9;
constexpr double kClusterTolerance = 1e-8;
constexpr double kOrthogonalityTolerance = 1e-10;

void check_cap(const ArcSpace& space) {
  if (space.size() > kDenseCap) {
    throw CapacityError("dense operators need at most " + std::to_string(kDenseCap) + " arcs, got " +
                        std::to_string(space.size()));
  }
}

}  // namespace

Eigen::MatrixXd dense_coin(const ArcSpace& space, const CoinSpec& coin) {
  check_cap(space);
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < space.node_count(); ++i) {
    const auto offset = static_cast<Eigen::Index>(space.block_offset(i));
    const auto d = static_cast<Eigen::Index>(space.block_size(i));
    const double sign = coin.marked == i ? -1.0 : 1.0;
    c.block(offset, offset, d, d) = sign * grover_coin(space.block_size(i));
  }
  return c;
}

Eigen::MatrixXd dense_shift(const ArcSpace& space) {
  check_cap(space);
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < space.size(); ++a) {
    s(static_cast<Eigen::Index>(space.reverse(a)), static_cast<Eigen::Index>(a)) = 1.0;
  }
  return s;
}

Eigen::MatrixXd dense_oracle(const ArcSpace& space, NodeId marked) {
  check_cap(space);
  const Eigen::VectorXd t = to_vector(marked_target_state(space, marked));
  const auto n = static_cast<Eigen::Index>(space.size());
  return Eigen::MatrixXd::Identity(n, n) - 2.0 * t * t.transpose();
}

Eigen::MatrixXd dense_step_matrix(const ArcSpace& space, const CoinSpec& coin) {
  check_cap(space);
  if (coin.marked && *coin.marked >= space.node_count()) throw ParameterError("marked node out of range");
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  // (S C)(r, c) = C(reverse(r), c); the coin is block diagonal.
  for (NodeId i = 0; i < space.node_count(); ++i) {
    const std::size_t offset = space.block_offset(i);
    const std::size_t d = space.block_size(i);
    Eigen::MatrixXd block = grover_coin(d);
    if (coin.marked == i) block = -block;
    for (std::size_t r = 0; r < d; ++r) {
      const auto row = static_cast<Eigen::Index>(space.reverse(offset + r));
      for (std::size_t c = 0; c < d; ++c) {
        u(row, static_cast<Eigen::Index>(offset + c)) = block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return u;
}

Eigen::VectorXd to_vector(const WalkState& state) {
  const auto amps = state.amplitudes();
  return Eigen::Map<const Eigen::VectorXd>(amps.data(), static_cast<Eigen::Index>(amps.size()));
}

Eigen::VectorXd SpectralReport::project_plus_one(const Eigen::VectorXd& v) const {
  if (plus_one_basis.cols() == 0) return Eigen::VectorXd::Zero(v.size());
  return plus_one_basis * (plus_one_basis.transpose() * v);
}

Eigen::VectorXd SpectralReport::project_x_prime(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = v - project_plus_one(v);
  if (start_direction.size() > 0) out += start_direction * start_direction.dot(v);
  return out;
}

SpectralReport eigen_analysis(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& start) {
  if (matrix.rows() != matrix.cols()) throw ContractViolation("matrix is not square");
  if (start.size() != matrix.rows()) throw ContractViolation("start state does not match matrix");
  const auto n = matrix.rows();
  const Eigen::MatrixXd gram = matrix.transpose() * matrix - Eigen::MatrixXd::Identity(n, n);
  if (n > 0 && gram.cwiseAbs().maxCoeff() > kOrthogonalityTolerance) {
    throw ContractViolation("matrix is not orthogonal");
  }

  SpectralReport report;
  report.dimension = static_cast<std::size_t>(n);

  const Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, false);
  for (const std::complex<double>& lambda : solver.eigenvalues()) {
    report.max_modulus_error = std::max(report.max_modulus_error, std::abs(std::abs(lambda) - 1.0));
    double phase = std::arg(lambda);
    if (phase <= -std::numbers::pi) phase += 2.0 * std::numbers::pi;
    report.eigenphases.push_back(phase);
  }
  std::sort(report.eigenphases.begin(), report.eigenphases.end());
  for (double phase : report.eigenphases) {
    if (!report.clusters.empty() && phase - report.clusters.back().phase < kClusterTolerance) {
      ++report.clusters.back().multiplicity;
    } else {
      report.clusters.push_back({phase, 1});
    }
  }

  // 2I - M - M^T = (I - M)^T (I - M) for orthogonal M; its eigenvalues are
  // 4 sin^2(theta / 2) and its kernel is the +1 eigenspace.
  const Eigen::MatrixXd gap = 2.0 * Eigen::MatrixXd::Identity(n, n) - matrix - matrix.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(gap);
  const Eigen::VectorXd& values = sym.eigenvalues();
  Eigen::Index kernel = 0;
  while (kernel < n && values(kernel) < kPlusOneTolerance) ++kernel;
  report.plus_one_dim = static_cast<std::size_t>(kernel);
  report.plus_one_basis = sym.eigenvectors().leftCols(kernel);
  if (kernel < n) {
    const double smallest = std::clamp(values(kernel), 0.0, 4.0);
    report.sigma = 2.0 * std::asin(std::sqrt(smallest) / 2.0);
  } else {
    report.degenerate = true;
  }

  const Eigen::VectorXd fixed = report.project_plus_one(start);
  report.start_plus_one_weight = fixed.squaredNorm();
  report.start_residual = (start - fixed).norm();
  if (fixed.norm() > 1e-12) report.start_direction = fixed.normalized();
  return report;
}

bool Fact1Report::all_passed() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const Fact1Result& r) { return r.passed; });
}

Fact1Report verify_fact1(const ArcSpace& space, std::span<const NodeId> marked, std::size_t probes,
                         std::uint64_t seed) {
  const Eigen::MatrixXd walk = dense_step_matrix(space, CoinSpec{});
  const Eigen::VectorXd start = to_vector(full_uniform_state(space));
  Fact1Report report{eigen_analysis(walk, start), {}};
  const SpectralReport& spec = report.spectrum;
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(space.size());

  const double residual_start = (start - spec.project_x_prime(start)).norm();
  for (NodeId m : marked) {
    if (m >= space.node_count()) throw ParameterError("marked node out of range");
    const Eigen::VectorXd target = to_vector(marked_target_state(space, m));
    Fact1Result r{};
    r.node = m;
    r.residual_start = residual_start;
    const Eigen::VectorXd in_x_prime = spec.project_x_prime(target);
    r.residual_target = (target - in_x_prime).norm();
    r.plus_one_overlap = spec.project_plus_one(target).squaredNorm();
    r.x_prime_overlap = in_x_prime.squaredNorm();
    for (std::size_t k = 0; k < probes; ++k) {
      Eigen::VectorXd v(n);
      for (Eigen::Index a = 0; a < n; ++a) v(a) = 2.0 * rng.uniform() - 1.0;
      v = spec.project_x_prime(v);
      if (v.norm() < 1e-12) continue;
      v.normalize();
      // S C O_m v with O_m = I - 2 |t><t|.
      const Eigen::VectorXd w = walk * (v - 2.0 * target * target.dot(v));
      r.residual_closure = std::max(r.residual_closure, (w - spec.project_x_prime(w)).norm());
    }
    r.passed = r.residual_start < kSubspaceResidualTolerance && r.residual_target < kSubspaceResidualTolerance &&
               r.residual_closure < kSubspaceResidualTolerance;
    report.nodes.push_back(r);
  }
  return report;
}

}  // namespace apsearch
