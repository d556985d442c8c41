// apsearch: generate Apollonian networks, run quantum-walk searches and
// sweeps, and check spectral premises. Every command writes its outputs
// followed by a JSON manifest.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apsearch/error.hpp"
#include "apsearch/graph.hpp"
#include "apsearch/io.hpp"
#include "apsearch/search.hpp"
#include "apsearch/spectral.hpp"

namespace fs = std::filesystem;
using namespace apsearch;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitContract = 4;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

InitSet parse_init(const std::string& text) { return text == "last" ? InitSet::kLastGeneration : InitSet::kFull; }

struct GenerateArgs {
  std::string kind = "apollonian";
  int generation = 0;
  int iterations = 1;
  int subdivisions = 1;
  std::uint64_t seed = Rng::kDefaultSeed;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  nlohmann::ordered_json params{{"kind", a.kind}};
  if (a.kind == "random") {
    params["iterations"] = a.iterations;
    params["subdivisions"] = a.subdivisions;
    params["seed"] = a.seed;
  } else {
    params["generation"] = a.generation;
  }
  RunManifest manifest("generate", params);
  const ApollonianGraph graph = a.kind == "random"
                                    ? build_random_apollonian(a.iterations, a.subdivisions, a.seed)
                                    : build_apollonian(a.generation);
  open_output(a.out) << serialize(graph);
  manifest.add_output(a.out);
  manifest.write(manifest_path(a.out));
  std::cout << "wrote " << a.out << " (" << graph.node_count() << " nodes, " << graph.edge_count() << " edges)\n";
  return 0;
}

struct SearchArgs {
  std::string graph_path;
  int generation = -1;
  NodeId marked = 0;
  std::string init = "full";
  long long steps = -1;
  std::size_t record_every = 1;
  std::string trace;
};

int run_search(const SearchArgs& a) {
  std::shared_ptr<const ApollonianGraph> graph;
  if (!a.graph_path.empty()) {
    graph = std::make_shared<const ApollonianGraph>(deserialize(read_file(a.graph_path)));
  } else if (a.generation >= 0) {
    graph = std::make_shared<const ApollonianGraph>(build_apollonian(a.generation));
  } else {
    throw ParameterError("one of --graph or --generation is required");
  }
  const ArcSpace space(graph);
  if (a.marked >= space.node_count()) {
    throw ParameterError("unknown node " + std::to_string(a.marked) + "; valid ids are 0.." +
                         std::to_string(space.node_count() - 1));
  }
  const bool last = graph->node_generation(a.marked) == graph->generation();
  const std::size_t steps =
      a.steps >= 0 ? static_cast<std::size_t>(a.steps)
                   : default_horizon(*graph, last ? MarkedSet{MarkedSetKind::kLastGeneration} : MarkedSet{MarkedSetKind::kAll});
  RunManifest manifest("search", {{"graph", a.graph_path},
                                  {"generation", graph->generation()},
                                  {"marked", a.marked},
                                  {"init", a.init},
                                  {"steps", steps},
                                  {"record_every", a.record_every}});
  const ProbabilityTrace trace = evolve_and_trace(space, a.marked, parse_init(a.init), steps, a.record_every);
  {
    auto out = open_output(a.trace);
    write_trace(out, trace);
  }
  manifest.add_output(a.trace);
  manifest.write(manifest_path(a.trace));
  const Channel channel = last ? Channel::kConditional : Channel::kRaw;
  try {
    const PeakReport peak = find_peak(trace, channel);
    std::cout << "peak (" << to_string(channel) << "): step " << peak.step << ", p = " << format_value(peak.p_at_peak)
              << "\n";
  } catch (const ParameterError&) {
    std::cout << "conditional channel undefined on this trace\n";
  }
  return 0;
}

struct SweepArgs {
  std::vector<int> generations;
  std::string marked_set = "last";
  std::string init = "full";
  bool group_by_generation = false;
  std::size_t sample = 0;
  std::uint64_t seed = Rng::kDefaultSeed;
  long long steps = -1;
  std::size_t record_every = 1;
  unsigned workers = 0;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  const fs::path dir(a.out);
  fs::create_directories(dir);
  RunManifest manifest("sweep", {{"generations", a.generations},
                                 {"marked_set", a.marked_set},
                                 {"init", a.init},
                                 {"group_by_generation", a.group_by_generation},
                                 {"sample", a.sample},
                                 {"seed", a.seed},
                                 {"steps", a.steps},
                                 {"record_every", a.record_every}});
  std::vector<SummaryRow> rows;
  std::vector<std::string> warnings;
  nlohmann::ordered_json groups_doc = nlohmann::ordered_json::array();
  for (int k : a.generations) {
    SweepOptions options;
    options.marked_set = a.marked_set == "all" ? MarkedSetKind::kAll : MarkedSetKind::kLastGeneration;
    options.init = parse_init(a.init);
    if (a.steps >= 0) options.steps = static_cast<std::size_t>(a.steps);
    options.record_every = a.record_every;
    options.group_by_generation = a.group_by_generation;
    if (a.sample > 0) options.sample_per_group = a.sample;
    options.seed = a.seed;
    options.workers = a.workers;
    const SweepResult result = sweep(k, options);
    for (const auto& w : result.warnings) warnings.push_back("K=" + std::to_string(k) + ": " + w);
    for (const auto& group : result.groups) {
      const std::string label = group.generation ? std::to_string(*group.generation) : a.marked_set;
      const fs::path file = dir / ("K" + std::to_string(k) + "_group_" + label + ".csv");
      {
        auto out = open_output(file);
        write_trace(out, group.mean);
      }
      manifest.add_output(file);
      rows.push_back(summarize(result, group, label));
      groups_doc.push_back({{"generation", k},
                            {"group", label},
                            {"file", file.filename().string()},
                            {"nodes", group.nodes},
                            {"sampled", group.sampled},
                            {"steps", result.steps}});
    }
  }
  const fs::path summary = dir / "summary.csv";
  {
    auto out = open_output(summary);
    write_summary(out, rows);
  }
  manifest.add_output(summary);

  std::vector<SummaryRow> fit_rows;
  std::vector<PeakObservation> observations;
  for (const auto& r : rows) {
    if (r.peak.channel == Channel::kConditional) {
      fit_rows.push_back(r);
      observations.push_back({r.generation, static_cast<double>(r.peak.step)});
    }
  }
  if (observations.size() >= 2) {
    const fs::path fit_path = dir / "fit.json";
    open_output(fit_path) << fit_document(fit_rows, fit_alpha(observations)).dump(2) << '\n';
    manifest.add_output(fit_path);
  }
  const fs::path groups_path = dir / "groups.json";
  open_output(groups_path) << nlohmann::ordered_json{{"groups", groups_doc}, {"warnings", warnings}}.dump(2) << '\n';
  manifest.add_output(groups_path);
  manifest.write(dir / "manifest.json");
  write_summary(std::cout, rows);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

struct SpectrumArgs {
  int generation = 0;
  long long marked = -1;
  std::size_t probes = 10;
  std::uint64_t seed = Rng::kDefaultSeed;
  std::string out;
};

int run_spectrum(const SpectrumArgs& a) {
  const auto counts = closed_form_counts(a.generation);
  if (2 * counts.edges > kDenseCap) {
    throw CapacityError("generation " + std::to_string(a.generation) + " has " + std::to_string(2 * counts.edges) +
                        " arcs; dense analysis is capped at " + std::to_string(kDenseCap));
  }
  RunManifest manifest("spectrum", {{"generation", a.generation},
                                    {"marked", a.marked},
                                    {"probes", a.probes},
                                    {"seed", a.seed}});
  const ArcSpace space = build_arc_space(build_apollonian(a.generation));
  std::vector<NodeId> candidates;
  if (a.marked >= 0) {
    if (static_cast<std::size_t>(a.marked) >= space.node_count()) {
      throw ParameterError("unknown node " + std::to_string(a.marked) + "; valid ids are 0.." +
                           std::to_string(space.node_count() - 1));
    }
    candidates.push_back(static_cast<NodeId>(a.marked));
  } else {
    for (NodeId i = 0; i < space.node_count(); ++i) candidates.push_back(i);
  }
  const Fact1Report report = verify_fact1(space, candidates, a.probes, a.seed);
  open_output(a.out) << spectral_document(report, a.generation).dump(2) << '\n';
  manifest.add_output(a.out);
  manifest.write(manifest_path(a.out));
  std::cout << "sigma = " << format_value(report.spectrum.sigma) << ", +1 eigenspace dimension "
            << report.spectrum.plus_one_dim << ", invariant-subspace checks " << (report.all_passed() ? "passed" : "FAILED")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-walk spatial search on Apollonian networks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Build a network and write its graph document");
  generate->add_option("--kind", gen.kind, "apollonian or random")->check(CLI::IsMember({"apollonian", "random"}));
  generate->add_option("--generation", gen.generation, "Generation K of the deterministic network");
  generate->add_option("--iterations", gen.iterations, "Rounds of the random variant");
  generate->add_option("--subdivisions", gen.subdivisions, "Faces subdivided per round (random variant)");
  generate->add_option("--seed", gen.seed, "Seed for the random variant");
  generate->add_option("--out", gen.out, "Output graph document")->required();

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Trace the success probability for one marked node");
  auto* graph_opt = search_cmd->add_option("--graph", search.graph_path, "Graph document to load");
  search_cmd->add_option("--generation", search.generation, "Build the deterministic network instead")
      ->excludes(graph_opt);
  search_cmd->add_option("--marked", search.marked, "Marked node id")->required();
  search_cmd->add_option("--init", search.init, "Initial superposition: full or last")
      ->check(CLI::IsMember({"full", "last"}));
  search_cmd->add_option("--steps", search.steps, "Number of walk steps (default: horizon for the node)");
  search_cmd->add_option("--record-every", search.record_every, "Record every n-th step")
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--trace", search.trace, "Output trace table")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Average traces over marked nodes, grouped and summarized");
  sweep_cmd->add_option("--generation", sw.generations, "Network generation(s), e.g. 4,5,6")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--marked-set", sw.marked_set, "all or last")->check(CLI::IsMember({"all", "last"}));
  sweep_cmd->add_option("--init", sw.init, "Initial superposition: full or last")
      ->check(CLI::IsMember({"full", "last"}));
  sweep_cmd->add_flag("--group-by-generation", sw.group_by_generation, "One group per node generation");
  sweep_cmd->add_option("--sample", sw.sample, "Seeded sample size per group")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sw.seed, "Sampling seed");
  sweep_cmd->add_option("--steps", sw.steps, "Number of walk steps (default: horizon)");
  sweep_cmd->add_option("--record-every", sw.record_every, "Record every n-th step")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--workers", sw.workers, "Worker threads (0: all cores)");
  sweep_cmd->add_option("--out", sw.out, "Output directory")->required();

  SpectrumArgs sp;
  auto* spectrum = app.add_subcommand("spectrum", "Dense eigenphase analysis and invariant-subspace checks");
  spectrum->add_option("--generation", sp.generation, "Network generation")->required();
  spectrum->add_option("--marked", sp.marked, "Check a single candidate (default: every node)");
  spectrum->add_option("--probes", sp.probes, "Random closure probes per node");
  spectrum->add_option("--seed", sp.seed, "Probe seed");
  spectrum->add_option("--out", sp.out, "Output report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*search_cmd) return run_search(search);
    if (*sweep_cmd) return run_sweep(sw);
    if (*spectrum) return run_spectrum(sp);
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitContract;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
