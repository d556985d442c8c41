#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "apsearch/graph.hpp"
#include "apsearch/rng.hpp"
#include "apsearch/walk.hpp"

namespace apsearch {

// Start state: uniform over every arc, or over arcs leaving last-generation
// nodes.
enum class InitSet { kFull, kLastGeneration };

enum class Channel { kRaw, kConditional };

std::string_view to_string(InitSet init);
std::string_view to_string(Channel channel);

inline constexpr std::size_t kMaxSteps = 1'000'000;
// Below this subspace mass the conditional probability is undefined.
inline constexpr double kSubspaceFloor = 1e-15;
inline constexpr double kPeakTieTolerance = 1e-9;

struct SearchConfig {
  int generation = 0;
  NodeId marked = 0;
  InitSet init = InitSet::kFull;
  std::size_t steps = 0;
  std::size_t record_every = 1;
};

struct TracePoint {
  std::size_t step;
  double p_marked;
  double p_subspace;
  std::optional<double> p_conditional;
};

struct ProbabilityTrace {
  std::vector<TracePoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Arcs whose tail belongs to the graph's last generation, as contiguous
// block ranges [begin, end).
struct ArcRanges {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;

  double mass(std::span<const double> amplitudes) const;
};

ArcRanges last_generation_arcs(const ArcSpace& space);

WalkState make_initial_state(const ArcSpace& space, InitSet init);

// Evolves with the marked coin and records the three channels at step 0 and
// every `record_every` steps, steps / record_every + 1 points in total.
ProbabilityTrace evolve_and_trace(const ArcSpace& space, NodeId marked, InitSet init,
                                  std::size_t steps, std::size_t record_every = 1);
ProbabilityTrace evolve_and_trace(const SearchConfig& config);

// Evolved state after `steps` applications of the marked walk.
WalkState evolve(const ArcSpace& space, NodeId marked, InitSet init, std::size_t steps);

struct Projection {
  double success_prob = 0.0;
  std::optional<WalkState> conditional_state;  // absent if success_prob < kSubspaceFloor
  std::optional<WalkState> complement_state;   // absent if success_prob > 1 - kSubspaceFloor

  // Throws DegenerateProjection when the projection cannot succeed.
  const WalkState& conditional() const;
};

class DegenerateProjection : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Projection onto arcs with last-generation tails.
Projection project_last_generation(const WalkState& state, const ArcSpace& space);

struct SearchOutcome {
  std::optional<NodeId> outcome;  // absent when both projections failed
  bool projection_succeeded = false;
  int attempts = 0;
};

// Measurement protocol on an already evolved state: project onto the
// last-generation subspace, and on success sample the position register
// from the conditional distribution. On failure apply one shift, project
// again and sample; a second failure ends the attempt.
class MeasurementSampler {
 public:
  MeasurementSampler(const WalkState& evolved, const ArcSpace& space);

  SearchOutcome sample(Rng& rng) const;

  double first_success_prob() const { return first_.success; }
  double second_success_prob() const { return second_.success; }
  // Exact probability that the protocol returns `node`.
  double outcome_probability(NodeId node) const;

 private:
  struct Stage {
    double success = 0.0;
    std::vector<NodeId> nodes;
    std::vector<double> cumulative;  // conditional CDF over `nodes`
  };
  static Stage make_stage(std::span<const double> amplitudes, const ArcSpace& space, const ArcRanges& subspace);
  static NodeId draw(const Stage& stage, Rng& rng);

  Stage first_;
  Stage second_;
};

// Full protocol: prepare, evolve `steps`, measure. Default init is the
// last-generation superposition.
SearchOutcome restricted_search(const ArcSpace& space, NodeId marked, std::size_t steps, Rng& rng,
                                InitSet init = InitSet::kLastGeneration);

struct TrialStatistics {
  std::size_t trials = 0;
  std::size_t found_marked = 0;
  std::size_t first_projection_successes = 0;
  std::size_t found_on_first_projection = 0;
  std::size_t projection_failures = 0;
  std::size_t second_attempts = 0;
};

// `trials` independent runs of the protocol sharing one evolved state.
TrialStatistics restricted_search_trials(const ArcSpace& space, NodeId marked, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed,
                                         InitSet init = InitSet::kLastGeneration);

struct PeakReport {
  std::size_t step;
  double p_at_peak;
  Channel channel;
};

// Earliest recorded step whose value is within kPeakTieTolerance of the
// channel maximum. Conditional points that are undefined are skipped.
PeakReport find_peak(const ProbabilityTrace& trace, Channel channel);

enum class MarkedSetKind { kAll, kLastGeneration };
using MarkedSet = std::variant<MarkedSetKind, std::vector<NodeId>>;

struct SweepOptions {
  MarkedSet marked_set = MarkedSetKind::kLastGeneration;
  InitSet init = InitSet::kFull;
  std::optional<std::size_t> steps;  // default: default_horizon()
  std::size_t record_every = 1;
  bool group_by_generation = false;
  std::optional<std::size_t> sample_per_group;
  std::uint64_t seed = Rng::kDefaultSeed;
  unsigned workers = 0;  // 0: hardware concurrency
  bool keep_node_traces = false;
};

struct GroupTrace {
  std::optional<int> generation;  // empty when not grouped
  std::vector<NodeId> nodes;
  bool sampled = false;
  bool last_generation_targets = false;  // every node is in the last generation
  ProbabilityTrace mean;
  std::vector<ProbabilityTrace> node_traces;  // filled when keep_node_traces
};

struct SweepResult {
  int generation = 0;
  std::size_t steps = 0;
  std::vector<GroupTrace> groups;
  std::vector<std::string> warnings;
};

// ceil(4 sqrt(N_last)) for last-generation marked sets, ceil(6 sqrt(N))
// otherwise.
std::size_t default_horizon(const ApollonianGraph& graph, const MarkedSet& marked_set);

// Pointwise mean of per-node traces. Each mean is reduced in node order, so
// results do not depend on the worker count.
SweepResult sweep(const ArcSpace& space, const SweepOptions& options);
SweepResult sweep(int generation, const SweepOptions& options);

ProbabilityTrace mean_trace(std::span<const ProbabilityTrace> traces);

struct ComplexityFit {
  double alpha;
  std::vector<double> residuals;  // observed T_p - alpha 3^(K/2)

  double predict(int generation) const;
};

struct PeakObservation {
  int generation;
  double peak_step;
};

// Least squares fit of T_p = alpha 3^(K/2).
ComplexityFit fit_alpha(std::span<const PeakObservation> observations);

// Expected cost T / p of repeating the search until it succeeds.
double expected_cost(double peak_step, double p_at_peak);

}  // namespace apsearch
