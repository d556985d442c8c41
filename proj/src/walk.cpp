#include "apsearch/walk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apsearch/error.hpp"

namespace apsearch {

namespace {

void check_dimension(std::size_t size, const ArcSpace& space) {
  if (size != space.size()) {
    throw ContractViolation("state has " + std::to_string(size) + " amplitudes, arc space has " +
                            std::to_string(space.size()));
  }
}

void check_node(NodeId node, const ArcSpace& space) {
  if (node >= space.node_count()) {
    throw ParameterError("node " + std::to_string(node) + " outside [0, " +
                         std::to_string(space.node_count() - 1) + "]");
  }
}

}  // namespace

ArcSpace::ArcSpace(std::shared_ptr<const ApollonianGraph> graph) : graph_(std::move(graph)) {
  const std::size_t n = graph_->node_count();
  offsets_.assign(n + 1, 0);
  for (NodeId i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + graph_->degree(i);
  tails_.reserve(offsets_[n]);
  heads_.reserve(offsets_[n]);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : graph_->neighbors(i)) {
      tails_.push_back(i);
      heads_.push_back(j);
    }
  }
  reverse_.resize(heads_.size());
  for (std::size_t a = 0; a < heads_.size(); ++a) reverse_[a] = arc_index(heads_[a], tails_[a]);
}

std::size_t ArcSpace::arc_index(NodeId tail, NodeId head) const {
  const auto begin = heads_.begin() + static_cast<std::ptrdiff_t>(offsets_[tail]);
  const auto end = heads_.begin() + static_cast<std::ptrdiff_t>(offsets_[tail + 1]);
  const auto it = std::lower_bound(begin, end, head);
  if (it == end || *it != head) {
    throw ParameterError("no arc " + std::to_string(tail) + " -> " + std::to_string(head));
  }
  return static_cast<std::size_t>(it - heads_.begin());
}

ArcSpace build_arc_space(ApollonianGraph graph) {
  return ArcSpace(std::make_shared<const ApollonianGraph>(std::move(graph)));
}

ArcSpace build_arc_space(std::shared_ptr<const ApollonianGraph> graph) { return ArcSpace(std::move(graph)); }

WalkState::WalkState(std::vector<double> amplitudes) : amplitudes_(std::move(amplitudes)) {
  const double n = norm();
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw ContractViolation("walk state norm " + std::to_string(n) + " is not 1");
  }
}

WalkState WalkState::normalized(std::vector<double> amplitudes) {
  double sum = 0.0;
  for (double a : amplitudes) sum += a * a;
  if (sum == 0.0) throw ContractViolation("cannot normalize the zero vector");
  const double scale = 1.0 / std::sqrt(sum);
  for (double& a : amplitudes) a *= scale;
  return WalkState(std::move(amplitudes));
}

double WalkState::norm() const {
  double sum = 0.0;
  for (double a : amplitudes_) sum += a * a;
  return std::sqrt(sum);
}

Eigen::MatrixXd grover_coin(std::size_t d) {
  if (d == 0) throw ParameterError("Grover coin dimension must be positive");
  const auto n = static_cast<Eigen::Index>(d);
  return Eigen::MatrixXd::Constant(n, n, 2.0 / static_cast<double>(d)) - Eigen::MatrixXd::Identity(n, n);
}

void apply_coin_inplace(std::span<double> amplitudes, const ArcSpace& space, const CoinSpec& coin) {
  check_dimension(amplitudes.size(), space);
  if (coin.marked) check_node(*coin.marked, space);
  const auto offsets = space.offsets();
  double* data = amplitudes.data();
  for (std::size_t node = 0; node + 1 < offsets.size(); ++node) {
    double* block = data + offsets[node];
    const std::size_t d = offsets[node + 1] - offsets[node];
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) sum += block[k];
    const double twice_mean = 2.0 * sum / static_cast<double>(d);
    for (std::size_t k = 0; k < d; ++k) block[k] = twice_mean - block[k];
  }
  if (coin.marked) {
    double* block = data + offsets[*coin.marked];
    const std::size_t d = offsets[*coin.marked + 1] - offsets[*coin.marked];
    for (std::size_t k = 0; k < d; ++k) block[k] = -block[k];
  }
}

void apply_shift_inplace(std::span<double> amplitudes, const ArcSpace& space) {
  check_dimension(amplitudes.size(), space);
  const auto reverse = space.reverse_index();
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    if (a < reverse[a]) std::swap(amplitudes[a], amplitudes[reverse[a]]);
  }
}

void step_inplace(std::span<double> amplitudes, const ArcSpace& space, const CoinSpec& coin) {
  apply_coin_inplace(amplitudes, space, coin);
  apply_shift_inplace(amplitudes, space);
}

WalkState apply_coin(const WalkState& state, const ArcSpace& space, const CoinSpec& coin) {
  std::vector<double> out(state.amplitudes().begin(), state.amplitudes().end());
  apply_coin_inplace(out, space, coin);
  return WalkState(std::move(out));
}

WalkState apply_shift(const WalkState& state, const ArcSpace& space) {
  std::vector<double> out(state.amplitudes().begin(), state.amplitudes().end());
  apply_shift_inplace(out, space);
  return WalkState(std::move(out));
}

WalkState step(const WalkState& state, const ArcSpace& space, const CoinSpec& coin) {
  std::vector<double> out(state.amplitudes().begin(), state.amplitudes().end());
  step_inplace(out, space, coin);
  return WalkState(std::move(out));
}

WalkState initial_state(const ArcSpace& space, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw ParameterError("initial node set is empty");
  std::vector<char> member(space.node_count(), 0);
  for (NodeId node : nodes) {
    check_node(node, space);
    member[node] = 1;
  }
  std::size_t arcs = 0;
  for (NodeId i = 0; i < space.node_count(); ++i) {
    if (member[i]) arcs += space.block_size(i);
  }
  if (arcs == 0) throw ParameterError("initial node set has no arcs");
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(arcs));
  std::vector<double> out(space.size(), 0.0);
  for (NodeId i = 0; i < space.node_count(); ++i) {
    if (!member[i]) continue;
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(space.block_offset(i)), space.block_size(i), amplitude);
  }
  return WalkState(std::move(out));
}

WalkState full_uniform_state(const ArcSpace& space) {
  return WalkState(std::vector<double>(space.size(), 1.0 / std::sqrt(static_cast<double>(space.size()))));
}

WalkState marked_target_state(const ArcSpace& space, NodeId marked) {
  const NodeId nodes[] = {marked};
  return initial_state(space, nodes);
}

std::vector<double> position_distribution(const WalkState& state, const ArcSpace& space) {
  check_dimension(state.size(), space);
  std::vector<double> p(space.node_count(), 0.0);
  for (std::size_t a = 0; a < state.size(); ++a) p[space.tail(a)] += state[a] * state[a];
  return p;
}

std::vector<ArcAmplitude> snapshot(const WalkState& state, const ArcSpace& space) {
  check_dimension(state.size(), space);
  std::vector<ArcAmplitude> out;
  out.reserve(state.size());
  for (std::size_t a = 0; a < state.size(); ++a) out.push_back({space.tail(a), space.head(a), state[a]});
  return out;
}

}  // namespace apsearch
