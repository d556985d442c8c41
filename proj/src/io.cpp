#include "apsearch/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "apsearch/error.hpp"

namespace apsearch {

std::string format_value(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

void write_trace(std::ostream& out, const ProbabilityTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& p : trace.points) {
    out << p.step << ',' << format_value(p.p_marked) << ',' << format_value(p.p_subspace) << ','
        << format_value(p.p_conditional.value_or(std::nan(""))) << '\n';
  }
}

ProbabilityTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw FormatError("line 1: expected trace header");
  ProbabilityTrace trace;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw FormatError("line " + std::to_string(number) + ": expected 4 columns");
    try {
      TracePoint p{std::stoul(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::nullopt};
      const double conditional = std::stod(cells[3]);
      if (!std::isnan(conditional)) p.p_conditional = conditional;
      trace.points.push_back(p);
    } catch (const std::logic_error&) {
      throw FormatError("line " + std::to_string(number) + ": malformed number");
    }
  }
  return trace;
}

double SummaryRow::two_sqrt_n_last() const { return 2.0 * std::sqrt(static_cast<double>(n_last)); }

SummaryRow summarize(const SweepResult& result, const GroupTrace& group, std::string label) {
  const bool conditional = std::any_of(group.mean.points.begin(), group.mean.points.end(),
                                       [](const TracePoint& p) { return p.p_conditional.has_value(); });
  // Conditional probabilities only describe last-generation targets.
  const Channel channel = conditional && group.last_generation_targets ? Channel::kConditional : Channel::kRaw;
  std::size_t n_last = 1;
  for (int g = 1; g < result.generation; ++g) n_last *= 3;
  if (result.generation == 0) n_last = 3;
  return {result.generation, std::move(label), n_last, find_peak(group.mean, channel)};
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    char two_sqrt[32];
    std::snprintf(two_sqrt, sizeof two_sqrt, "%.2f", r.two_sqrt_n_last());
    out << r.generation << ',' << r.group << ',' << r.n_last << ',' << r.peak.step << ',' << two_sqrt << ','
        << format_value(r.peak.p_at_peak) << ',' << to_string(r.peak.channel) << '\n';
  }
}

nlohmann::ordered_json fit_document(std::span<const SummaryRow> rows, const ComplexityFit& fit) {
  nlohmann::ordered_json doc;
  doc["model"] = "T_p = alpha * 3^(K/2)";
  doc["alpha"] = fit.alpha;
  auto list = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    list.push_back({{"generation", r.generation},
                    {"n_last", r.n_last},
                    {"t_p", r.peak.step},
                    {"two_sqrt_n_last", r.two_sqrt_n_last()},
                    {"p_bar", r.peak.p_at_peak},
                    {"fitted_t", fit.predict(r.generation)},
                    {"residual", fit.residuals[k]},
                    {"expected_cost", expected_cost(static_cast<double>(r.peak.step), r.peak.p_at_peak)}});
  }
  doc["observations"] = std::move(list);
  return doc;
}

nlohmann::ordered_json spectral_document(const Fact1Report& report, int generation) {
  const auto& s = report.spectrum;
  nlohmann::ordered_json doc;
  doc["generation"] = generation;
  doc["dimension"] = s.dimension;
  doc["sigma"] = s.sigma;
  doc["degenerate"] = s.degenerate;
  doc["plus_one_dim"] = s.plus_one_dim;
  doc["max_modulus_error"] = s.max_modulus_error;
  doc["start_residual"] = s.start_residual;
  auto histogram = nlohmann::ordered_json::array();
  for (const auto& c : s.clusters) histogram.push_back({{"phase", c.phase}, {"multiplicity", c.multiplicity}});
  doc["eigenphase_histogram"] = std::move(histogram);
  doc["eigenphases"] = s.eigenphases;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& r : report.nodes) {
    nodes.push_back({{"node", r.node},
                     {"residual_a", r.residual_start},
                     {"residual_b", r.residual_target},
                     {"residual_c", r.residual_closure},
                     {"plus_one_overlap", r.plus_one_overlap},
                     {"x_prime_overlap", r.x_prime_overlap},
                     {"passed", r.passed}});
  }
  doc["subspace_checks"] = std::move(nodes);
  doc["subspace_checks_passed"] = report.all_passed();
  return doc;
}

RunManifest::RunManifest(std::string command, nlohmann::ordered_json parameters)
    : command_(std::move(command)), parameters_(std::move(parameters)), started_(std::chrono::steady_clock::now()) {}

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

nlohmann::ordered_json RunManifest::document() const {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
  nlohmann::ordered_json doc;
  doc["command"] = command_;
  doc["version"] = kVersion;
  doc["parameters"] = parameters_;
  doc["outputs"] = outputs_;
  doc["wall_seconds"] = elapsed.count();
  return doc;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << document().dump(2) << '\n';
}

}  // namespace apsearch
