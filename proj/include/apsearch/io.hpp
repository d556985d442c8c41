#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apsearch/search.hpp"
#include "apsearch/spectral.hpp"

namespace apsearch {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kTraceHeader = "step,p_marked,p_subspace,p_conditional";
inline constexpr std::string_view kSummaryHeader = "generation,group,n_last,t_p,two_sqrt_n_last,p_bar,channel";

// Decimal with 12 significant digits; an undefined conditional value is
// written as "nan".
std::string format_value(double value);

void write_trace(std::ostream& out, const ProbabilityTrace& trace);
// Throws FormatError naming the offending line.
ProbabilityTrace read_trace(std::istream& in);

// One row of the peak summary table.
struct SummaryRow {
  int generation;
  std::string group;  // "all", "last" or a node generation
  std::size_t n_last;
  PeakReport peak;

  double two_sqrt_n_last() const;
};

// Peak of a group mean: conditional channel when defined, raw otherwise.
SummaryRow summarize(const SweepResult& result, const GroupTrace& group, std::string label);

void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

nlohmann::ordered_json fit_document(std::span<const SummaryRow> rows, const ComplexityFit& fit);
nlohmann::ordered_json spectral_document(const Fact1Report& report, int generation);

// Run record written after every output file.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::ordered_json parameters);

  void add_output(const std::filesystem::path& path);
  const std::vector<std::string>& outputs() const { return outputs_; }
  nlohmann::ordered_json document() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::ordered_json parameters_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace apsearch
