#include <doctest.h>

#include <sstream>

#include "apsearch/error.hpp"
#include "apsearch/io.hpp"

using namespace apsearch;

TEST_CASE("trace table format") {
  ProbabilityTrace t;
  t.points.push_back({0, 1.0 / 27.0, 1.0, 1.0 / 27.0});
  t.points.push_back({1, 0.0, 0.0, std::nullopt});
  std::ostringstream out;
  write_trace(out, t);
  CHECK(out.str() == "step,p_marked,p_subspace,p_conditional\n"
                     "0,0.037037037037,1,0.037037037037\n"
                     "1,0,0,nan\n");
  std::istringstream in(out.str());
  const auto back = read_trace(in);
  REQUIRE(back.size() == 2);
  CHECK(back.points[0].p_marked == doctest::Approx(1.0 / 27.0).epsilon(1e-11));
  CHECK_FALSE(back.points[1].p_conditional.has_value());
}

TEST_CASE("trace written from a simulation survives a read") {
  const ArcSpace s = build_arc_space(build_apollonian(3));
  const auto trace = evolve_and_trace(s, 12, InitSet::kFull, 30);
  std::stringstream buffer;
  write_trace(buffer, trace);
  const auto back = read_trace(buffer);
  REQUIRE(back.size() == trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    CHECK(back.points[t].p_marked == doctest::Approx(trace.points[t].p_marked).epsilon(1e-11));
  }
}

TEST_CASE("malformed trace tables") {
  std::istringstream no_header("0,1,1,1\n");
  CHECK_THROWS_AS(read_trace(no_header), FormatError);
  std::istringstream short_row("step,p_marked,p_subspace,p_conditional\n0,1,1\n");
  try {
    read_trace(short_row);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream garbage("step,p_marked,p_subspace,p_conditional\n0,x,1,1\n");
  CHECK_THROWS_AS(read_trace(garbage), FormatError);
}

TEST_CASE("summary rows") {
  SweepOptions o;
  const auto result = sweep(4, o);
  const auto row = summarize(result, result.groups[0], "last");
  CHECK(row.n_last == 27);
  CHECK(row.peak.step == 10);
  CHECK(row.peak.channel == Channel::kConditional);
  std::ostringstream out;
  const std::vector<SummaryRow> rows{row};
  write_summary(out, rows);
  CHECK(out.str().rfind("generation,group,n_last,t_p,two_sqrt_n_last,p_bar,channel\n4,last,27,10,10.39,0.95", 0) == 0);

  const std::vector<PeakObservation> obs{{4, 10}, {5, 18}};
  const std::vector<SummaryRow> two{row, row};
  const auto doc = fit_document(two, fit_alpha(obs));
  CHECK(doc["observations"].size() == 2);
  CHECK(doc["observations"][0]["expected_cost"].get<double>() == doctest::Approx(10.0 / row.peak.p_at_peak));
}

TEST_CASE("manifest lists outputs") {
  RunManifest m("search", {{"generation", 4}});
  m.add_output("a.csv");
  m.add_output("b.csv");
  const auto doc = m.document();
  CHECK(doc["command"] == "search");
  CHECK(doc["outputs"].size() == 2);
  CHECK(doc["parameters"]["generation"] == 4);
  CHECK(doc.contains("wall_seconds"));
}
