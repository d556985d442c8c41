#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "apsearch/graph.hpp"

namespace apsearch {

// Directed arcs (tail -> head) of a graph, grouped by tail with heads
// ascending inside each block. Block i spans [block_offset(i),
// block_offset(i) + degree(i)). This ordering is the basis of the coin space.
class ArcSpace {
 public:
  explicit ArcSpace(std::shared_ptr<const ApollonianGraph> graph);

  const ApollonianGraph& graph() const { return *graph_; }
  std::shared_ptr<const ApollonianGraph> graph_ptr() const { return graph_; }

  std::size_t size() const { return heads_.size(); }
  std::size_t node_count() const { return offsets_.size() - 1; }

  std::size_t block_offset(NodeId node) const { return offsets_[node]; }
  std::size_t block_size(NodeId node) const { return offsets_[node + 1] - offsets_[node]; }

  NodeId tail(std::size_t arc) const { return tails_[arc]; }
  NodeId head(std::size_t arc) const { return heads_[arc]; }
  std::size_t reverse(std::size_t arc) const { return reverse_[arc]; }

  // Index of arc tail -> head; ParameterError if the nodes are not adjacent.
  std::size_t arc_index(NodeId tail, NodeId head) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::size_t> reverse_index() const { return reverse_; }

 private:
  std::shared_ptr<const ApollonianGraph> graph_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> tails_;
  std::vector<NodeId> heads_;
  std::vector<std::size_t> reverse_;
};

ArcSpace build_arc_space(ApollonianGraph graph);
ArcSpace build_arc_space(std::shared_ptr<const ApollonianGraph> graph);

// Real amplitude vector over arcs.
class WalkState {
 public:
  WalkState() = default;
  // Throws ContractViolation unless the norm is 1 within kNormTolerance.
  explicit WalkState(std::vector<double> amplitudes);
  // Rescales to unit norm; ContractViolation for the zero vector.
  static WalkState normalized(std::vector<double> amplitudes);

  std::size_t size() const { return amplitudes_.size(); }
  std::span<const double> amplitudes() const { return amplitudes_; }
  std::span<double> amplitudes() { return amplitudes_; }
  double operator[](std::size_t arc) const { return amplitudes_[arc]; }
  double norm() const;

 private:
  std::vector<double> amplitudes_;
};

inline constexpr double kNormTolerance = 1e-10;

// Coin selection: Grover diffusion on every block, negated on `marked`.
// An empty `marked` gives the unperturbed walk operator.
struct CoinSpec {
  std::optional<NodeId> marked;
};

// d x d Grover diffusion matrix, all entries 2/d minus the identity.
Eigen::MatrixXd grover_coin(std::size_t d);

// In-place kernels. Each block costs O(degree): a <- 2 * mean(block) - a,
// negated on the marked block. The shift swaps every arc with its reverse.
void apply_coin_inplace(std::span<double> amplitudes, const ArcSpace& space, const CoinSpec& coin);
void apply_shift_inplace(std::span<double> amplitudes, const ArcSpace& space);
void step_inplace(std::span<double> amplitudes, const ArcSpace& space, const CoinSpec& coin);

WalkState apply_coin(const WalkState& state, const ArcSpace& space, const CoinSpec& coin);
WalkState apply_shift(const WalkState& state, const ArcSpace& space);
// U = S C.
WalkState step(const WalkState& state, const ArcSpace& space, const CoinSpec& coin);

// Equal amplitude 1/sqrt(M) on every arc whose tail is in `nodes`, where M is
// the sum of their degrees. Duplicates are ignored.
WalkState initial_state(const ArcSpace& space, std::span<const NodeId> nodes);
WalkState full_uniform_state(const ArcSpace& space);

// Local equal superposition on the marked node's block.
WalkState marked_target_state(const ArcSpace& space, NodeId marked);

// p_i = sum of squared amplitudes over arcs leaving node i.
std::vector<double> position_distribution(const WalkState& state, const ArcSpace& space);

struct ArcAmplitude {
  NodeId tail;
  NodeId head;
  double amplitude;
};

std::vector<ArcAmplitude> snapshot(const WalkState& state, const ArcSpace& space);

}  // namespace apsearch
