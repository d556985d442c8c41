#include "apsearch/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "apsearch/error.hpp"

namespace apsearch {

std::string_view to_string(InitSet init) { return init == InitSet::kFull ? "full" : "last"; }

std::string_view to_string(Channel channel) { return channel == Channel::kRaw ? "raw" : "conditional"; }

double ArcRanges::mass(std::span<const double> amplitudes) const {
  double sum = 0.0;
  for (const auto& [begin, end] : ranges) {
    for (std::size_t a = begin; a < end; ++a) sum += amplitudes[a] * amplitudes[a];
  }
  return sum;
}

ArcRanges last_generation_arcs(const ArcSpace& space) {
  const auto& graph = space.graph();
  ArcRanges out;
  for (NodeId node : nodes_of_generation(graph, graph.generation())) {
    const std::size_t begin = space.block_offset(node);
    const std::size_t end = begin + space.block_size(node);
    if (!out.ranges.empty() && out.ranges.back().second == begin) {
      out.ranges.back().second = end;
    } else {
      out.ranges.emplace_back(begin, end);
    }
  }
  return out;
}

WalkState make_initial_state(const ArcSpace& space, InitSet init) {
  if (init == InitSet::kFull) return full_uniform_state(space);
  const auto last = nodes_of_generation(space.graph(), space.graph().generation());
  return initial_state(space, last);
}

namespace {

void check_marked(const ArcSpace& space, NodeId marked) {
  if (marked >= space.node_count()) {
    throw ParameterError("marked node " + std::to_string(marked) + " outside valid range [0, " +
                         std::to_string(space.node_count() - 1) + "]");
  }
}

TracePoint record(std::size_t t, std::span<const double> psi, const ArcSpace& space, NodeId marked,
                  const ArcRanges& subspace) {
  double p_marked = 0.0;
  const std::size_t begin = space.block_offset(marked);
  for (std::size_t a = begin; a < begin + space.block_size(marked); ++a) p_marked += psi[a] * psi[a];
  const double p_subspace = subspace.mass(psi);
  TracePoint point{t, p_marked, p_subspace, std::nullopt};
  if (p_subspace > kSubspaceFloor) point.p_conditional = p_marked / p_subspace;
  return point;
}

}  // namespace

ProbabilityTrace evolve_and_trace(const ArcSpace& space, NodeId marked, InitSet init,
                                  std::size_t steps, std::size_t record_every) {
  check_marked(space, marked);
  if (steps > kMaxSteps) throw ParameterError("steps exceeds " + std::to_string(kMaxSteps));
  if (record_every == 0) throw ParameterError("record_every must be positive");
  const ArcRanges subspace = last_generation_arcs(space);
  const CoinSpec coin{marked};
  WalkState state = make_initial_state(space, init);
  auto psi = state.amplitudes();

  ProbabilityTrace trace;
  trace.points.reserve(steps / record_every + 1);
  trace.points.push_back(record(0, psi, space, marked, subspace));
  for (std::size_t t = 1; t <= steps; ++t) {
    step_inplace(psi, space, coin);
    if (t % record_every == 0) trace.points.push_back(record(t, psi, space, marked, subspace));
  }
  return trace;
}

ProbabilityTrace evolve_and_trace(const SearchConfig& config) {
  const ArcSpace space = build_arc_space(build_apollonian(config.generation));
  return evolve_and_trace(space, config.marked, config.init, config.steps, config.record_every);
}

WalkState evolve(const ArcSpace& space, NodeId marked, InitSet init, std::size_t steps) {
  check_marked(space, marked);
  if (steps > kMaxSteps) throw ParameterError("steps exceeds " + std::to_string(kMaxSteps));
  WalkState state = make_initial_state(space, init);
  const CoinSpec coin{marked};
  for (std::size_t t = 0; t < steps; ++t) step_inplace(state.amplitudes(), space, coin);
  return state;
}

const WalkState& Projection::conditional() const {
  if (!conditional_state) {
    throw DegenerateProjection("projection onto the last generation has probability " +
                               std::to_string(success_prob));
  }
  return *conditional_state;
}

Projection project_last_generation(const WalkState& state, const ArcSpace& space) {
  if (state.size() != space.size()) throw ContractViolation("state does not match arc space");
  const ArcRanges subspace = last_generation_arcs(space);
  std::vector<double> inside(state.size(), 0.0);
  std::vector<double> outside(state.amplitudes().begin(), state.amplitudes().end());
  for (const auto& [begin, end] : subspace.ranges) {
    for (std::size_t a = begin; a < end; ++a) {
      inside[a] = outside[a];
      outside[a] = 0.0;
    }
  }
  Projection out;
  out.success_prob = subspace.mass(state.amplitudes());
  if (out.success_prob >= kSubspaceFloor) out.conditional_state = WalkState::normalized(std::move(inside));
  if (out.success_prob <= 1.0 - kSubspaceFloor) out.complement_state = WalkState::normalized(std::move(outside));
  return out;
}

MeasurementSampler::Stage MeasurementSampler::make_stage(std::span<const double> amplitudes,
                                                         const ArcSpace& space, const ArcRanges& subspace) {
  Stage stage;
  stage.success = subspace.mass(amplitudes);
  if (stage.success < kSubspaceFloor) return stage;
  double running = 0.0;
  for (NodeId node : nodes_of_generation(space.graph(), space.graph().generation())) {
    double p = 0.0;
    const std::size_t begin = space.block_offset(node);
    for (std::size_t a = begin; a < begin + space.block_size(node); ++a) p += amplitudes[a] * amplitudes[a];
    running += p / stage.success;
    stage.nodes.push_back(node);
    stage.cumulative.push_back(running);
  }
  return stage;
}

MeasurementSampler::MeasurementSampler(const WalkState& evolved, const ArcSpace& space) {
  if (evolved.size() != space.size()) throw ContractViolation("state does not match arc space");
  const ArcRanges subspace = last_generation_arcs(space);
  first_ = make_stage(evolved.amplitudes(), space, subspace);

  // Post-measurement state of a failed projection, shifted once.
  std::vector<double> rest(evolved.amplitudes().begin(), evolved.amplitudes().end());
  for (const auto& [begin, end] : subspace.ranges) std::fill(rest.begin() + static_cast<std::ptrdiff_t>(begin),
                                                             rest.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
  double sum = 0.0;
  for (double a : rest) sum += a * a;
  if (sum < kSubspaceFloor) return;
  const double scale = 1.0 / std::sqrt(sum);
  for (double& a : rest) a *= scale;
  apply_shift_inplace(rest, space);
  second_ = make_stage(rest, space, subspace);
}

NodeId MeasurementSampler::draw(const Stage& stage, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(stage.cumulative.begin(), stage.cumulative.end(), u);
  if (it == stage.cumulative.end()) return stage.nodes.back();
  return stage.nodes[static_cast<std::size_t>(it - stage.cumulative.begin())];
}

SearchOutcome MeasurementSampler::sample(Rng& rng) const {
  SearchOutcome out;
  out.attempts = 1;
  if (!first_.nodes.empty() && rng.uniform() < first_.success) {
    out.projection_succeeded = true;
    out.outcome = draw(first_, rng);
    return out;
  }
  out.attempts = 2;
  if (!second_.nodes.empty() && rng.uniform() < second_.success) {
    out.projection_succeeded = true;
    out.outcome = draw(second_, rng);
  }
  return out;
}

double MeasurementSampler::outcome_probability(NodeId node) const {
  auto conditional = [node](const Stage& stage) {
    const auto it = std::lower_bound(stage.nodes.begin(), stage.nodes.end(), node);
    if (it == stage.nodes.end() || *it != node) return 0.0;
    const auto k = static_cast<std::size_t>(it - stage.nodes.begin());
    return stage.cumulative[k] - (k == 0 ? 0.0 : stage.cumulative[k - 1]);
  };
  return first_.success * conditional(first_) + (1.0 - first_.success) * second_.success * conditional(second_);
}

SearchOutcome restricted_search(const ArcSpace& space, NodeId marked, std::size_t steps, Rng& rng,
                                InitSet init) {
  const MeasurementSampler sampler(evolve(space, marked, init, steps), space);
  return sampler.sample(rng);
}

TrialStatistics restricted_search_trials(const ArcSpace& space, NodeId marked, std::size_t steps,
                                         std::size_t trials, std::uint64_t seed, InitSet init) {
  const MeasurementSampler sampler(evolve(space, marked, init, steps), space);
  Rng rng(seed);
  TrialStatistics stats;
  stats.trials = trials;
  for (std::size_t k = 0; k < trials; ++k) {
    const SearchOutcome out = sampler.sample(rng);
    if (out.attempts > 1) {
      ++stats.second_attempts;
    } else {
      ++stats.first_projection_successes;
      if (out.outcome == marked) ++stats.found_on_first_projection;
    }
    if (!out.projection_succeeded) ++stats.projection_failures;
    if (out.outcome == marked) ++stats.found_marked;
  }
  return stats;
}

PeakReport find_peak(const ProbabilityTrace& trace, Channel channel) {
  if (trace.empty()) throw ParameterError("cannot find the peak of an empty trace");
  auto value = [channel](const TracePoint& p) -> std::optional<double> {
    if (channel == Channel::kRaw) return p.p_marked;
    return p.p_conditional;
  };
  std::optional<double> best;
  for (const auto& p : trace.points) {
    const auto v = value(p);
    if (v && (!best || *v > *best)) best = v;
  }
  if (!best) throw ParameterError("conditional channel is undefined at every step");
  for (const auto& p : trace.points) {
    const auto v = value(p);
    if (v && *v >= *best - kPeakTieTolerance) return {p.step, *v, channel};
  }
  return {trace.points.front().step, *best, channel};  // unreachable
}

std::size_t default_horizon(const ApollonianGraph& graph, const MarkedSet& marked_set) {
  const auto* kind = std::get_if<MarkedSetKind>(&marked_set);
  if (kind && *kind == MarkedSetKind::kLastGeneration) {
    const auto n_last = nodes_of_generation(graph, graph.generation()).size();
    return static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(static_cast<double>(n_last))));
  }
  return static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(static_cast<double>(graph.node_count()))));
}

ProbabilityTrace mean_trace(std::span<const ProbabilityTrace> traces) {
  ProbabilityTrace out;
  if (traces.empty()) return out;
  const std::size_t length = traces.front().size();
  for (const auto& t : traces) {
    if (t.size() != length) throw ContractViolation("traces differ in length");
  }
  out.points.reserve(length);
  const auto count = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < length; ++k) {
    double marked = 0.0;
    double subspace = 0.0;
    double conditional = 0.0;
    std::size_t defined = 0;
    for (const auto& t : traces) {
      const auto& p = t.points[k];
      marked += p.p_marked;
      subspace += p.p_subspace;
      if (p.p_conditional) {
        conditional += *p.p_conditional;
        ++defined;
      }
    }
    TracePoint point{traces.front().points[k].step, marked / count, subspace / count, std::nullopt};
    if (defined > 0) point.p_conditional = conditional / static_cast<double>(defined);
    out.points.push_back(point);
  }
  return out;
}

namespace {

std::vector<NodeId> sample_nodes(std::vector<NodeId> nodes, std::size_t count, Rng& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + rng.below(nodes.size() - k);
    std::swap(nodes[k], nodes[pick]);
  }
  nodes.resize(count);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace

SweepResult sweep(const ArcSpace& space, const SweepOptions& options) {
  const auto& graph = space.graph();
  SweepResult result;
  result.generation = graph.generation();
  result.steps = options.steps.value_or(default_horizon(graph, options.marked_set));
  if (result.steps > kMaxSteps) throw ParameterError("steps exceeds " + std::to_string(kMaxSteps));

  std::vector<NodeId> marked;
  if (const auto* list = std::get_if<std::vector<NodeId>>(&options.marked_set)) {
    marked = *list;
    std::sort(marked.begin(), marked.end());
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
    for (NodeId m : marked) check_marked(space, m);
  } else if (std::get<MarkedSetKind>(options.marked_set) == MarkedSetKind::kAll) {
    marked.resize(graph.node_count());
    for (NodeId i = 0; i < marked.size(); ++i) marked[i] = i;
  } else {
    marked = nodes_of_generation(graph, graph.generation());
  }

  // Candidate groups, in generation order.
  std::vector<GroupTrace> groups;
  if (options.group_by_generation) {
    const auto* kind = std::get_if<MarkedSetKind>(&options.marked_set);
    const int first = (kind && *kind == MarkedSetKind::kLastGeneration) ? graph.generation() : 0;
    for (int g = first; g <= graph.generation(); ++g) {
      GroupTrace group;
      group.generation = g;
      for (NodeId m : marked) {
        if (graph.node_generation(m) == g) group.nodes.push_back(m);
      }
      groups.push_back(std::move(group));
    }
  } else {
    GroupTrace group;
    group.nodes = marked;
    groups.push_back(std::move(group));
  }

  Rng rng(options.seed);
  for (auto& group : groups) {
    if (group.nodes.empty()) {
      result.warnings.push_back(group.generation
                                    ? "generation " + std::to_string(*group.generation) + ": no marked nodes, skipped"
                                    : "no marked nodes, skipped");
      continue;
    }
    if (options.sample_per_group && group.nodes.size() > *options.sample_per_group) {
      if (*options.sample_per_group == 0) throw ParameterError("sample size must be positive");
      group.nodes = sample_nodes(std::move(group.nodes), *options.sample_per_group, rng);
      group.sampled = true;
    }
    group.last_generation_targets = std::all_of(group.nodes.begin(), group.nodes.end(), [&](NodeId m) {
      return graph.node_generation(m) == graph.generation();
    });
    result.groups.push_back(std::move(group));
  }

  struct Job {
    std::size_t group;
    NodeId node;
  };
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    for (NodeId m : result.groups[g].nodes) jobs.push_back({g, m});
  }
  std::vector<ProbabilityTrace> traces(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      traces[k] = evolve_and_trace(space, jobs[k].node, options.init, result.steps, options.record_every);
    }
  };
  unsigned workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::size_t k = 0;
  for (auto& group : result.groups) {
    const std::span<const ProbabilityTrace> slice(traces.data() + k, group.nodes.size());
    group.mean = mean_trace(slice);
    if (options.keep_node_traces) group.node_traces.assign(slice.begin(), slice.end());
    k += group.nodes.size();
  }
  return result;
}

SweepResult sweep(int generation, const SweepOptions& options) {
  return sweep(build_arc_space(build_apollonian(generation)), options);
}

double ComplexityFit::predict(int generation) const {
  return alpha * std::pow(3.0, generation / 2.0);
}

ComplexityFit fit_alpha(std::span<const PeakObservation> observations) {
  if (observations.size() < 2) throw ParameterError("fit_alpha needs at least two observations");
  double xy = 0.0;
  double xx = 0.0;
  for (const auto& o : observations) {
    const double x = std::pow(3.0, o.generation / 2.0);
    xy += x * o.peak_step;
    xx += x * x;
  }
  ComplexityFit fit{xy / xx, {}};
  if (!(fit.alpha > 0.0)) throw ParameterError("fitted alpha is not positive");
  for (const auto& o : observations) fit.residuals.push_back(o.peak_step - fit.predict(o.generation));
  return fit;
}

double expected_cost(double peak_step, double p_at_peak) {
  if (!(p_at_peak > 0.0) || p_at_peak > 1.0) throw ParameterError("success probability must lie in (0, 1]");
  return peak_step / p_at_peak;
}

}  // namespace apsearch
