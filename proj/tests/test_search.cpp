#include <doctest.h>

#include <cmath>
#include <map>

#include "apsearch/error.hpp"
#include "apsearch/search.hpp"
#include "oracle/dense_oracle.hpp"

using namespace apsearch;

namespace {

std::shared_ptr<const ApollonianGraph> graph_of(int k) {
  return std::make_shared<const ApollonianGraph>(build_apollonian(k));
}

// Exact probability that the measurement protocol returns `marked` after
// `steps`, from the brute-force oracle: project, else shift the remainder
// and project once more.
double oracle_success(const ApollonianGraph& g, NodeId marked, bool last_init, std::size_t steps) {
  const oracle::Basis b = oracle::make_basis(g);
  const oracle::Matrix u = oracle::walk_matrix(g, b, marked);
  oracle::Vector v = oracle::uniform_on(b, last_init);
  for (std::size_t t = 0; t < steps; ++t) v = oracle::multiply(u, v);
  const auto first = oracle::measure(b, v, marked);
  double result = first.p_marked;  // = P(project) * P(marked | project)
  if (first.p_subspace >= 1.0 - 1e-15) return result;
  oracle::Vector rest(v.size(), 0.0);
  for (std::size_t a = 0; a < v.size(); ++a) {
    if (b.generation_of_tail[a] != b.last_generation) rest[b.index.at({b.arcs[a].second, b.arcs[a].first})] = v[a];
  }
  // `rest` is the shifted, unnormalized remainder with mass 1 - p_subspace.
  result += oracle::measure(b, rest, marked).p_marked;
  return result;
}

}  // namespace

TEST_CASE("trace shape and the initial point") {
  const ArcSpace s(graph_of(4));
  const NodeId m = 16;
  const auto t0 = evolve_and_trace(s, m, InitSet::kLastGeneration, 0);
  REQUIRE(t0.size() == 1);
  CHECK(t0.points[0].p_marked == doctest::Approx(1.0 / 27.0).epsilon(1e-14));
  CHECK(t0.points[0].p_subspace == doctest::Approx(1.0));
  CHECK(evolve_and_trace(s, m, InitSet::kFull, 20, 3).size() == 7);
  CHECK(evolve_and_trace(s, m, InitSet::kFull, 20, 3).points.back().step == 18);
  CHECK_THROWS_AS(evolve_and_trace(s, 43, InitSet::kFull, 5), ParameterError);
  CHECK_THROWS_AS(evolve_and_trace(s, 0, InitSet::kFull, kMaxSteps + 1), ParameterError);
  CHECK_THROWS_AS(evolve_and_trace(s, 0, InitSet::kFull, 5, 0), ParameterError);
  const auto cfg = evolve_and_trace(SearchConfig{4, m, InitSet::kFull, 20, 1});
  CHECK(cfg.points[10].p_marked == evolve_and_trace(s, m, InitSet::kFull, 20).points[10].p_marked);
}

TEST_CASE("trace equals the dense oracle for the K=2 center") {
  const auto g = graph_of(2);
  const ArcSpace s(g);
  for (bool last_init : {false, true}) {
    const auto trace = evolve_and_trace(s, 3, last_init ? InitSet::kLastGeneration : InitSet::kFull, 15);
    const auto expected = oracle::trace(*g, 3, last_init, 15);
    REQUIRE(trace.size() == expected.size());
    for (std::size_t t = 0; t < trace.size(); ++t) {
      CHECK(std::abs(trace.points[t].p_marked - expected[t].p_marked) < 1e-12);
      CHECK(std::abs(trace.points[t].p_subspace - expected[t].p_subspace) < 1e-12);
    }
  }
}

TEST_CASE("trace bounds for last-generation targets") {
  const auto g = graph_of(5);
  const ArcSpace s(g);
  for (NodeId m : {NodeId{43}, NodeId{80}, NodeId{123}}) {
    for (InitSet init : {InitSet::kFull, InitSet::kLastGeneration}) {
      for (const auto& p : evolve_and_trace(s, m, init, 60).points) {
        CHECK(p.p_marked >= 0.0);
        CHECK(p.p_marked <= p.p_subspace + 1e-15);
        CHECK(p.p_subspace <= 1.0 + 1e-12);
        if (p.p_conditional) CHECK(*p.p_conditional <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("K=4 peaks for both start states") {
  const ArcSpace s(graph_of(4));
  // Full-uniform start: conditional peak at step 10.
  const auto full = find_peak(evolve_and_trace(s, 16, InitSet::kFull, 20), Channel::kConditional);
  CHECK(full.step == 10);
  CHECK(full.p_at_peak == doctest::Approx(0.957272).epsilon(1e-5));
  // Last-generation start: the conditional probability peaks early.
  const auto last = find_peak(evolve_and_trace(s, 16, InitSet::kLastGeneration, 20), Channel::kConditional);
  CHECK(last.step == 4);
}

TEST_CASE("projection onto the last generation") {
  const auto g = graph_of(4);
  const ArcSpace s(g);
  const WalkState restricted = make_initial_state(s, InitSet::kLastGeneration);
  const Projection p0 = project_last_generation(restricted, s);
  CHECK(p0.success_prob == doctest::Approx(1.0));
  CHECK_FALSE(p0.complement_state.has_value());
  CHECK(p0.conditional().size() == s.size());

  const Projection p1 = project_last_generation(apply_shift(restricted, s), s);
  CHECK(p1.success_prob == 0.0);
  CHECK_THROWS_AS(p1.conditional(), DegenerateProjection);
  REQUIRE(p1.complement_state.has_value());

  const Projection p10 = project_last_generation(evolve(s, 16, InitSet::kFull, 10), s);
  CHECK(p10.success_prob > 0.4);
  CHECK(p10.success_prob < 0.6);
  const double mass = p10.conditional().norm() + p10.complement_state->norm();
  CHECK(mass == doctest::Approx(2.0));
}

TEST_CASE("protocol at step 0 is uniform over the last generation") {
  const auto g = graph_of(4);
  const ArcSpace s(g);
  Rng rng(5);
  std::map<NodeId, int> counts;
  const int trials = 27000;
  const MeasurementSampler sampler(make_initial_state(s, InitSet::kLastGeneration), s);
  CHECK(sampler.first_success_prob() == doctest::Approx(1.0));
  for (int k = 0; k < trials; ++k) {
    const auto out = sampler.sample(rng);
    REQUIRE(out.projection_succeeded);
    REQUIRE(out.attempts == 1);
    REQUIRE(out.outcome.has_value());
    CHECK(g->node_generation(*out.outcome) == 4);
    ++counts[*out.outcome];
  }
  CHECK(counts.size() == 27);
  const double sd = std::sqrt(1000.0 * (26.0 / 27.0));
  for (const auto& [node, c] : counts) CHECK(std::abs(c - 1000) < 5 * sd);

  Rng rng2(1);
  const auto single = restricted_search(s, 16, 0, rng2);
  CHECK(single.projection_succeeded);
}

TEST_CASE("protocol frequencies match the dense oracle at K=2") {
  const auto g = graph_of(2);
  const ArcSpace s(g);
  const std::size_t trials = 10000;
  for (NodeId m : {NodeId{4}, NodeId{6}}) {
    for (std::size_t steps = 0; steps <= 20; ++steps) {
      CAPTURE(steps);
      const double p = oracle_success(*g, m, true, steps);
      const MeasurementSampler sampler(evolve(s, m, InitSet::kLastGeneration, steps), s);
      CHECK(sampler.outcome_probability(m) == doctest::Approx(p).epsilon(1e-10));
      const auto stats = restricted_search_trials(s, m, steps, trials, 1000 + steps);
      const double freq = static_cast<double>(stats.found_marked) / trials;
      const double sigma = std::sqrt(p * (1.0 - p) / trials);
      CHECK(std::abs(freq - p) <= 3.0 * sigma + 1e-12);
    }
  }
}

TEST_CASE("seeded protocol is reproducible") {
  const ArcSpace s(graph_of(4));
  const auto a = restricted_search_trials(s, 20, 10, 500, 42, InitSet::kFull);
  const auto b = restricted_search_trials(s, 20, 10, 500, 42, InitSet::kFull);
  CHECK(a.found_marked == b.found_marked);
  CHECK(a.second_attempts == b.second_attempts);
  CHECK(a.second_attempts > 0);
}

TEST_CASE("find_peak") {
  ProbabilityTrace constant;
  for (std::size_t t = 0; t < 5; ++t) constant.points.push_back({t, 0.25, 0.5, 0.5});
  CHECK(find_peak(constant, Channel::kRaw).step == 0);
  CHECK(find_peak(constant, Channel::kConditional).step == 0);

  ProbabilityTrace spike = constant;
  spike.points[3].p_marked = 0.9;
  CHECK(find_peak(spike, Channel::kRaw).step == 3);
  CHECK(find_peak(spike, Channel::kRaw).p_at_peak == 0.9);

  ProbabilityTrace near_tie = constant;
  near_tie.points[1].p_marked = 0.5;
  near_tie.points[4].p_marked = 0.5 + 5e-10;
  CHECK(find_peak(near_tie, Channel::kRaw).step == 1);

  ProbabilityTrace undefined;
  undefined.points.push_back({0, 0.0, 0.0, std::nullopt});
  CHECK_THROWS_AS(find_peak(undefined, Channel::kConditional), ParameterError);
  CHECK_THROWS_AS(find_peak(ProbabilityTrace{}, Channel::kRaw), ParameterError);
}

TEST_CASE("sweep reductions") {
  const ArcSpace s(graph_of(4));
  SUBCASE("single node equals its own trace") {
    SweepOptions o;
    o.marked_set = std::vector<NodeId>{20};
    o.steps = 25;
    const auto r = sweep(s, o);
    REQUIRE(r.groups.size() == 1);
    const auto direct = evolve_and_trace(s, 20, InitSet::kFull, 25);
    for (std::size_t t = 0; t <= 25; ++t) {
      CHECK(r.groups[0].mean.points[t].p_marked == direct.points[t].p_marked);
      CHECK(r.groups[0].mean.points[t].p_conditional == direct.points[t].p_conditional);
    }
  }
  SUBCASE("result does not depend on the worker count") {
    SweepOptions o;
    o.marked_set = MarkedSetKind::kAll;
    o.group_by_generation = true;
    o.workers = 1;
    const auto one = sweep(s, o);
    o.workers = 4;
    const auto four = sweep(s, o);
    REQUIRE(one.groups.size() == four.groups.size());
    for (std::size_t g = 0; g < one.groups.size(); ++g) {
      for (std::size_t t = 0; t < one.groups[g].mean.size(); ++t) {
        CHECK(one.groups[g].mean.points[t].p_marked == four.groups[g].mean.points[t].p_marked);
      }
    }
  }
  SUBCASE("default horizons") {
    CHECK(default_horizon(s.graph(), MarkedSetKind::kLastGeneration) == 21);
    CHECK(default_horizon(s.graph(), MarkedSetKind::kAll) == 40);
    const auto r = sweep(s, SweepOptions{});
    CHECK(r.steps == 21);
    CHECK(r.groups[0].mean.size() == 22);
    CHECK(r.groups[0].last_generation_targets);
  }
  SUBCASE("seeded sampling") {
    SweepOptions o;
    o.marked_set = MarkedSetKind::kAll;
    o.group_by_generation = true;
    o.sample_per_group = 2;
    o.seed = 9;
    o.steps = 5;
    const auto a = sweep(s, o);
    const auto b = sweep(s, o);
    REQUIRE(a.groups.size() == 5);
    for (std::size_t g = 0; g < a.groups.size(); ++g) {
      CHECK(a.groups[g].nodes == b.groups[g].nodes);
      CHECK(a.groups[g].nodes.size() == (g == 1 ? 1u : 2u));
      CHECK(a.groups[g].sampled == (g != 1));
    }
    o.seed = 10;
    const auto c = sweep(s, o);
    bool differs = false;
    for (std::size_t g = 0; g < a.groups.size(); ++g) differs = differs || a.groups[g].nodes != c.groups[g].nodes;
    CHECK(differs);
  }
  SUBCASE("empty groups are reported") {
    SweepOptions o;
    o.marked_set = std::vector<NodeId>{3, 20};
    o.group_by_generation = true;
    o.steps = 3;
    const auto r = sweep(s, o);
    CHECK(r.groups.size() == 2);
    CHECK(r.warnings.size() == 3);
  }
}

TEST_CASE("K=2 full sweep matches the dense oracle") {
  const auto g = graph_of(2);
  const ArcSpace s(g);
  SweepOptions o;
  o.marked_set = MarkedSetKind::kAll;
  o.group_by_generation = true;
  o.steps = 15;
  const auto r = sweep(s, o);
  REQUIRE(r.groups.size() == 3);
  for (const auto& group : r.groups) {
    for (std::size_t t = 0; t <= 15; ++t) {
      double expected = 0.0;
      for (NodeId m : group.nodes) expected += oracle::trace(*g, m, false, 15)[t].p_marked;
      expected /= static_cast<double>(group.nodes.size());
      CHECK(std::abs(group.mean.points[t].p_marked - expected) < 1e-12);
    }
  }
}

TEST_CASE("K=5 group peak") {
  SweepOptions o;
  o.init = InitSet::kFull;
  const auto r = sweep(5, o);
  CHECK(find_peak(r.groups[0].mean, Channel::kConditional).step == 18);
}

TEST_CASE("per-node peaks cluster around the group peak") {
  for (int k = 4; k <= 6; ++k) {
    CAPTURE(k);
    SweepOptions o;
    o.keep_node_traces = true;
    const auto r = sweep(k, o);
    const auto group_peak = find_peak(r.groups[0].mean, Channel::kConditional).step;
    for (const auto& t : r.groups[0].node_traces) {
      const auto node_peak = find_peak(t, Channel::kConditional).step;
      CHECK(std::abs(static_cast<long>(node_peak) - static_cast<long>(group_peak)) <= 1);
    }
  }
}

TEST_CASE("generation groups peak at different steps") {
  // First-lobe window: the last-generation horizon ceil(4 sqrt(N_last)).
  SweepOptions o;
  o.marked_set = MarkedSetKind::kAll;
  o.group_by_generation = true;
  o.init = InitSet::kFull;
  o.steps = 63;
  const auto r = sweep(6, o);
  std::map<int, std::size_t> peaks;
  for (const auto& g : r.groups) peaks[*g.generation] = find_peak(g.mean, Channel::kRaw).step;
  CHECK(peaks[4] < peaks[5]);
  CHECK(peaks[5] < peaks[6]);
  CHECK(static_cast<double>(peaks[6]) >= 1.25 * static_cast<double>(peaks[4]));
}

TEST_CASE("fit_alpha") {
  const std::vector<PeakObservation> table{{4, 10}, {5, 18}, {6, 32}, {7, 54}, {8, 92}};
  const auto fit = fit_alpha(table);
  const double reference = 2.0 / std::sqrt(3.0);  // 2 sqrt(N_last) = (2 / sqrt 3) 3^(K/2)
  CHECK(std::abs(fit.alpha / reference - 1.0) < 0.05);
  const std::vector<double> row{10.4, 18.0, 31.2, 54.0, 93.5};
  for (std::size_t k = 0; k < table.size(); ++k) {
    CHECK(std::abs(fit.predict(table[k].generation) / row[k] - 1.0) < 0.05);
    CHECK(std::abs(fit.residuals[k]) / table[k].peak_step < 0.10);
  }

  std::vector<PeakObservation> exact;
  for (int k = 2; k <= 6; ++k) exact.push_back({k, std::pow(3.0, k / 2.0)});
  const auto unit = fit_alpha(exact);
  CHECK(unit.alpha == doctest::Approx(1.0).epsilon(1e-14));
  for (double r : unit.residuals) CHECK(std::abs(r) < 1e-12);

  const std::vector<PeakObservation> dup{{4, 12}, {4, 12}};
  CHECK(fit_alpha(dup).alpha == doctest::Approx(12.0 / 9.0));
  CHECK_THROWS_AS(fit_alpha(std::vector<PeakObservation>{{4, 10}}), ParameterError);
}

TEST_CASE("expected_cost") {
  CHECK(expected_cost(10, 0.963) == doctest::Approx(10.384215991692628));
  CHECK(expected_cost(7, 1.0) == 7.0);
  CHECK(expected_cost(92, 0.977) == doctest::Approx(94.16581371545548));
  CHECK_THROWS_AS(expected_cost(10, 0.0), ParameterError);
  CHECK_THROWS_AS(expected_cost(10, -0.5), ParameterError);
}
