#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace apsearch {

using NodeId = std::uint32_t;

enum class GraphKind { kApollonian, kRandomApollonian };

std::string_view to_string(GraphKind kind);

// One subdivision performed during construction: the face (sorted corner
// triple) that was split and the node placed inside it.
struct FaceRecord {
  std::array<NodeId, 3> corners;
  NodeId inserted;

  bool operator==(const FaceRecord&) const = default;
};

// Largest generation the deterministic builder accepts.
inline constexpr int kMaxGeneration = 16;

// Undirected simple graph with per-node generation labels. Node ids are
// assigned in creation order, so generation labels are non-decreasing in id.
// Adjacency is stored in compressed rows with each row sorted ascending.
// Immutable once built.
class ApollonianGraph {
 public:
  // Validates symmetry, simplicity, sorted rows and label ranges; throws
  // FormatError on violation.
  ApollonianGraph(GraphKind kind, int generation, std::optional<std::uint64_t> seed,
                  std::vector<std::vector<NodeId>> adjacency, std::vector<int> node_generation,
                  std::vector<FaceRecord> face_log = {});

  GraphKind kind() const { return kind_; }
  int generation() const { return generation_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  std::size_t node_count() const { return node_generation_.size(); }
  std::size_t edge_count() const { return neighbors_.size() / 2; }
  std::size_t degree(NodeId node) const { return offsets_[node + 1] - offsets_[node]; }
  std::size_t max_degree() const;
  int node_generation(NodeId node) const { return node_generation_[node]; }

  std::span<const NodeId> neighbors(NodeId node) const {
    return {neighbors_.data() + offsets_[node], degree(node)};
  }
  bool adjacent(NodeId a, NodeId b) const;

  // Edge list with i < j, sorted lexicographically.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  std::span<const FaceRecord> face_log() const { return face_log_; }

  // Structural equality: kind, generation, seed, adjacency and labels. The
  // face log is an audit record and is not part of the serialized form.
  bool operator==(const ApollonianGraph& other) const;

 private:
  GraphKind kind_;
  int generation_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<int> node_generation_;
  std::vector<FaceRecord> face_log_;
};

// Iterated subdivision of every internal face, K rounds. Corners are ids
// 0, 1, 2 (generation 0); round g inserts 3^(g-1) nodes. Throws
// ParameterError for K < 0 and CapacityError for K > kMaxGeneration.
ApollonianGraph build_apollonian(int generation);

// Random variant: each round subdivides `subdivisions_per_iteration`
// distinct internal faces chosen uniformly with Rng(seed). Early rounds with
// fewer faces than requested subdivide every face; the request must fit the
// face pool of the final round.
ApollonianGraph build_random_apollonian(int iterations, int subdivisions_per_iteration,
                                        std::uint64_t seed);

struct Rational {
  std::int64_t num;
  std::int64_t den;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& other) const { return num * other.den == other.num * den; }
};

struct ClosedFormCounts {
  std::uint64_t nodes;
  std::uint64_t edges;
  std::optional<std::uint64_t> max_degree;  // defined for K >= 1
  Rational average_degree;                  // 6 - 24 / (3^K + 5)
};

// N = (3^K + 5) / 2, E = 3 (3^K + 1) / 2, d_max = 3 * 2^(K-1).
ClosedFormCounts closed_form_counts(int generation);

// Nodes created in round g, ascending. ParameterError if g is outside
// [0, graph.generation()].
std::vector<NodeId> nodes_of_generation(const ApollonianGraph& graph, int g);

// Graph document (JSON). Deterministic: equal graphs give identical bytes.
std::string serialize(const ApollonianGraph& graph);
ApollonianGraph deserialize(std::string_view document);

}  // namespace apsearch
