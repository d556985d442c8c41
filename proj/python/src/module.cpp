#include <algorithm>
#include <memory>
#include <sstream>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "apsearch/error.hpp"
#include "apsearch/graph.hpp"
#include "apsearch/io.hpp"
#include "apsearch/search.hpp"
#include "apsearch/spectral.hpp"
#include "apsearch/walk.hpp"

namespace py = pybind11;
using namespace apsearch;

namespace {

using GraphPtr = std::shared_ptr<const ApollonianGraph>;

struct SpectralSummary {
  int generation;
  std::size_t dimension;
  std::vector<double> eigenphases;
  std::size_t plus_one_dim;
  double sigma;
  bool degenerate;
  double start_residual;
  double max_residual;
  std::vector<NodeId> nodes;
  bool all_passed;
};

py::array_t<double> column(const ProbabilityTrace& t, auto field) {
  py::array_t<double> out(static_cast<py::ssize_t>(t.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < t.size(); ++i) view(static_cast<py::ssize_t>(i)) = field(t.points[i]);
  return out;
}

MarkedSet marked_set_from(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) {
    const auto s = obj.cast<std::string>();
    if (s == "all") return MarkedSetKind::kAll;
    if (s == "last") return MarkedSetKind::kLastGeneration;
    throw ParameterError("marked_set must be 'all', 'last' or a list of node ids");
  }
  return obj.cast<std::vector<NodeId>>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coined quantum walk search on Apollonian networks";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

  py::enum_<InitSet>(m, "InitSet").value("FULL", InitSet::kFull).value("LAST_GENERATION", InitSet::kLastGeneration);
  py::enum_<Channel>(m, "Channel").value("RAW", Channel::kRaw).value("CONDITIONAL", Channel::kConditional);

  py::class_<ApollonianGraph, std::shared_ptr<ApollonianGraph>>(m, "Graph")
      .def_property_readonly("kind", [](const ApollonianGraph& g) { return std::string(to_string(g.kind())); })
      .def_property_readonly("generation", &ApollonianGraph::generation)
      .def_property_readonly("seed", &ApollonianGraph::seed)
      .def_property_readonly("node_count", &ApollonianGraph::node_count)
      .def_property_readonly("edge_count", &ApollonianGraph::edge_count)
      .def_property_readonly("max_degree", &ApollonianGraph::max_degree)
      .def("degree", &ApollonianGraph::degree)
      .def("node_generation", &ApollonianGraph::node_generation)
      .def("neighbors",
           [](const ApollonianGraph& g, NodeId n) {
             const auto s = g.neighbors(n);
             return std::vector<NodeId>(s.begin(), s.end());
           })
      .def("edges", &ApollonianGraph::edges)
      .def("__eq__", [](const ApollonianGraph& a, const ApollonianGraph& b) { return a == b; })
      .def("__repr__", [](const ApollonianGraph& g) {
        return "<Graph " + std::string(to_string(g.kind())) + " K=" + std::to_string(g.generation()) +
               " N=" + std::to_string(g.node_count()) + " E=" + std::to_string(g.edge_count()) + ">";
      });

  m.def("build_apollonian", [](int k) { return std::make_shared<ApollonianGraph>(build_apollonian(k)); },
        py::arg("generation"));
  m.def("build_random_apollonian",
        [](int iterations, int subdivisions, std::uint64_t seed) {
          return std::make_shared<ApollonianGraph>(build_random_apollonian(iterations, subdivisions, seed));
        },
        py::arg("iterations"), py::arg("subdivisions"), py::arg("seed"));
  m.def("closed_form_counts", [](int k) {
    const auto c = closed_form_counts(k);
    py::dict d;
    d["nodes"] = c.nodes;
    d["edges"] = c.edges;
    d["max_degree"] = c.max_degree;
    d["average_degree"] = py::make_tuple(c.average_degree.num, c.average_degree.den);
    return d;
  }, py::arg("generation"));
  m.def("nodes_of_generation", &nodes_of_generation, py::arg("graph"), py::arg("generation"));
  m.def("serialize", &serialize, py::arg("graph"));
  m.def("deserialize", [](const std::string& doc) { return std::make_shared<ApollonianGraph>(deserialize(doc)); },
        py::arg("document"));

  py::class_<ArcSpace>(m, "ArcSpace")
      .def(py::init([](std::shared_ptr<ApollonianGraph> g) { return ArcSpace(GraphPtr(std::move(g))); }),
           py::arg("graph"))
      .def(py::init([](int k) { return ArcSpace(std::make_shared<const ApollonianGraph>(build_apollonian(k))); }),
           py::arg("generation"))
      .def_property_readonly("size", &ArcSpace::size)
      .def_property_readonly("node_count", &ArcSpace::node_count)
      .def_property_readonly("generation", [](const ArcSpace& s) { return s.graph().generation(); })
      .def("arc_index", &ArcSpace::arc_index, py::arg("tail"), py::arg("head"))
      .def("__len__", &ArcSpace::size);

  py::class_<ProbabilityTrace>(m, "Trace")
      .def_property_readonly("step", [](const ProbabilityTrace& t) {
        return column(t, [](const TracePoint& p) { return static_cast<double>(p.step); });
      })
      .def_property_readonly("p_marked", [](const ProbabilityTrace& t) {
        return column(t, [](const TracePoint& p) { return p.p_marked; });
      })
      .def_property_readonly("p_subspace", [](const ProbabilityTrace& t) {
        return column(t, [](const TracePoint& p) { return p.p_subspace; });
      })
      .def_property_readonly("p_conditional", [](const ProbabilityTrace& t) {
        return column(t, [](const TracePoint& p) { return p.p_conditional.value_or(std::nan("")); });
      })
      .def("__len__", &ProbabilityTrace::size);

  m.def("evolve_and_trace",
        [](const ArcSpace& s, NodeId marked, std::size_t steps, InitSet init, std::size_t record_every) {
          return evolve_and_trace(s, marked, init, steps, record_every);
        },
        py::arg("space"), py::arg("marked"), py::arg("steps"), py::arg("init") = InitSet::kFull,
        py::arg("record_every") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("evolve",
        [](const ArcSpace& s, NodeId marked, std::size_t steps, InitSet init) {
          const auto st = evolve(s, marked, init, steps);
          const auto a = st.amplitudes();
          return py::array_t<double>(static_cast<py::ssize_t>(a.size()), a.data());
        },
        py::arg("space"), py::arg("marked"), py::arg("steps"), py::arg("init") = InitSet::kFull);
  m.def("project_last_generation",
        [](const ArcSpace& s, py::array_t<double, py::array::c_style | py::array::forcecast> amplitudes) {
          std::vector<double> v(amplitudes.data(), amplitudes.data() + amplitudes.size());
          return project_last_generation(WalkState(std::move(v)), s).success_prob;
        },
        py::arg("space"), py::arg("amplitudes"));
  m.def("format_trace", [](const ProbabilityTrace& t) {
    std::ostringstream out;
    write_trace(out, t);
    return out.str();
  });

  py::class_<PeakReport>(m, "PeakReport")
      .def_readonly("step", &PeakReport::step)
      .def_readonly("p_at_peak", &PeakReport::p_at_peak)
      .def_readonly("channel", &PeakReport::channel);
  m.def("find_peak", &find_peak, py::arg("trace"), py::arg("channel") = Channel::kConditional);

  py::class_<GroupTrace>(m, "GroupTrace")
      .def_readonly("generation", &GroupTrace::generation)
      .def_readonly("nodes", &GroupTrace::nodes)
      .def_readonly("sampled", &GroupTrace::sampled)
      .def_readonly("last_generation_targets", &GroupTrace::last_generation_targets)
      .def_readonly("mean", &GroupTrace::mean);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("generation", &SweepResult::generation)
      .def_readonly("steps", &SweepResult::steps)
      .def_readonly("groups", &SweepResult::groups)
      .def_readonly("warnings", &SweepResult::warnings);
  m.def("sweep",
        [](int k, const py::object& marked_set, InitSet init, std::optional<std::size_t> steps,
           std::size_t record_every, bool group_by_generation, std::optional<std::size_t> sample,
           std::uint64_t seed, unsigned workers) {
          SweepOptions o;
          o.marked_set = marked_set_from(marked_set);
          o.init = init;
          o.steps = steps;
          o.record_every = record_every;
          o.group_by_generation = group_by_generation;
          o.sample_per_group = sample;
          o.seed = seed;
          o.workers = workers;
          py::gil_scoped_release release;
          return sweep(k, o);
        },
        py::arg("generation"), py::arg("marked_set") = "last", py::arg("init") = InitSet::kFull,
        py::arg("steps") = py::none(), py::arg("record_every") = 1, py::arg("group_by_generation") = false,
        py::arg("sample") = py::none(), py::arg("seed") = Rng::kDefaultSeed, py::arg("workers") = 0);

  py::class_<ComplexityFit>(m, "ComplexityFit")
      .def_readonly("alpha", &ComplexityFit::alpha)
      .def_readonly("residuals", &ComplexityFit::residuals)
      .def("predict", &ComplexityFit::predict, py::arg("generation"));
  m.def("fit_alpha",
        [](const std::vector<std::pair<int, double>>& pairs) {
          std::vector<PeakObservation> obs;
          for (const auto& [k, t] : pairs) obs.push_back({k, t});
          return fit_alpha(obs);
        },
        py::arg("observations"));
  m.def("expected_cost", &expected_cost, py::arg("peak_step"), py::arg("p_at_peak"));

  py::class_<TrialStatistics>(m, "TrialStatistics")
      .def_readonly("trials", &TrialStatistics::trials)
      .def_readonly("found_marked", &TrialStatistics::found_marked)
      .def_readonly("first_projection_successes", &TrialStatistics::first_projection_successes)
      .def_readonly("found_on_first_projection", &TrialStatistics::found_on_first_projection)
      .def_readonly("projection_failures", &TrialStatistics::projection_failures)
      .def_readonly("second_attempts", &TrialStatistics::second_attempts);
  m.def("restricted_search_trials", &restricted_search_trials, py::arg("space"), py::arg("marked"),
        py::arg("steps"), py::arg("trials"), py::arg("seed") = Rng::kDefaultSeed,
        py::arg("init") = InitSet::kLastGeneration, py::call_guard<py::gil_scoped_release>());

  py::class_<SpectralSummary>(m, "SpectralSummary")
      .def_readonly("generation", &SpectralSummary::generation)
      .def_readonly("dimension", &SpectralSummary::dimension)
      .def_readonly("eigenphases", &SpectralSummary::eigenphases)
      .def_readonly("plus_one_dim", &SpectralSummary::plus_one_dim)
      .def_readonly("sigma", &SpectralSummary::sigma)
      .def_readonly("degenerate", &SpectralSummary::degenerate)
      .def_readonly("start_residual", &SpectralSummary::start_residual)
      .def_readonly("max_residual", &SpectralSummary::max_residual)
      .def_readonly("nodes", &SpectralSummary::nodes)
      .def_readonly("all_passed", &SpectralSummary::all_passed);
  m.def("verify_fact1",
        [](const ArcSpace& s, std::optional<std::vector<NodeId>> marked, std::size_t probes, std::uint64_t seed) {
          std::vector<NodeId> nodes;
          if (marked) {
            nodes = *marked;
          } else {
            for (NodeId i = 0; i < s.node_count(); ++i) nodes.push_back(i);
          }
          const auto r = verify_fact1(s, nodes, probes, seed);
          double worst = 0.0;
          for (const auto& n : r.nodes)
            worst = std::max({worst, n.residual_start, n.residual_target, n.residual_closure});
          return SpectralSummary{s.graph().generation(), r.spectrum.dimension, r.spectrum.eigenphases,
                                 r.spectrum.plus_one_dim, r.spectrum.sigma, r.spectrum.degenerate,
                                 r.spectrum.start_residual, worst, nodes, r.all_passed()};
        },
        py::arg("space"), py::arg("marked") = py::none(), py::arg("probes") = 10, py::arg("seed") = 1);
}
