#include "apsearch/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "apsearch/error.hpp"
#include "apsearch/rng.hpp"

namespace apsearch {

namespace {

using Face = std::array<NodeId, 3>;

std::uint64_t pow3(int k) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r *= 3;
  return r;
}

Face sorted_face(NodeId a, NodeId b, NodeId c) {
  Face f{a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

// Mutable adjacency used while building; converted to the immutable graph at
// the end.
struct Builder {
  std::vector<std::vector<NodeId>> adjacency{{1, 2}, {0, 2}, {0, 1}};
  std::vector<int> node_generation{0, 0, 0};
  std::vector<FaceRecord> face_log;

  // Inserts a node inside `face` and returns its three child faces in
  // lexicographic order.
  std::array<Face, 3> subdivide(const Face& face, int round) {
    const auto v = static_cast<NodeId>(adjacency.size());
    adjacency.emplace_back(face.begin(), face.end());
    node_generation.push_back(round);
    for (NodeId corner : face) adjacency[corner].push_back(v);
    face_log.push_back({face, v});
    const auto [a, b, c] = face;
    return {sorted_face(a, b, v), sorted_face(a, c, v), sorted_face(b, c, v)};
  }

  ApollonianGraph finish(GraphKind kind, int generation, std::optional<std::uint64_t> seed) && {
    for (auto& row : adjacency) std::sort(row.begin(), row.end());
    return ApollonianGraph(kind, generation, seed, std::move(adjacency),
                           std::move(node_generation), std::move(face_log));
  }
};

std::string edge_text(NodeId a, NodeId b) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(GraphKind kind) {
  return kind == GraphKind::kApollonian ? "apollonian" : "random_apollonian";
}

ApollonianGraph::ApollonianGraph(GraphKind kind, int generation,
                                 std::optional<std::uint64_t> seed,
                                 std::vector<std::vector<NodeId>> adjacency,
                                 std::vector<int> node_generation,
                                 std::vector<FaceRecord> face_log)
    : kind_(kind),
      generation_(generation),
      seed_(seed),
      node_generation_(std::move(node_generation)),
      face_log_(std::move(face_log)) {
  const std::size_t n = adjacency.size();
  if (n != node_generation_.size()) {
    throw FormatError("adjacency has " + std::to_string(n) + " rows but " +
                      std::to_string(node_generation_.size()) + " generation labels");
  }
  if (generation_ < 0) throw FormatError("negative generation");
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int g = node_generation_[i];
    if (g < 0 || g > generation_) {
      throw FormatError("node " + std::to_string(i) + ": generation " + std::to_string(g) +
                        " outside [0, " + std::to_string(generation_) + "]");
    }
    const auto& row = adjacency[i];
    for (std::size_t k = 0; k < row.size(); ++k) {
      const NodeId j = row[k];
      if (j >= n) throw FormatError("node " + std::to_string(i) + ": neighbor out of range");
      if (j == i) throw FormatError("self-loop at node " + std::to_string(i));
      if (k > 0 && row[k - 1] >= j) {
        throw FormatError("node " + std::to_string(i) + ": duplicate or unsorted edge " +
                          edge_text(static_cast<NodeId>(i), j));
      }
    }
    offsets_[i + 1] = offsets_[i] + row.size();
  }
  neighbors_.reserve(offsets_[n]);
  for (auto& row : adjacency) neighbors_.insert(neighbors_.end(), row.begin(), row.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId j : neighbors(static_cast<NodeId>(i))) {
      if (!adjacent(j, static_cast<NodeId>(i))) {
        throw FormatError("asymmetric edge " + edge_text(static_cast<NodeId>(i), j));
      }
    }
  }
}

std::size_t ApollonianGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < node_count(); ++i) best = std::max(best, degree(static_cast<NodeId>(i)));
  return best;
}

bool ApollonianGraph::adjacent(NodeId a, NodeId b) const {
  const auto row = neighbors(a);
  return std::binary_search(row.begin(), row.end(), b);
}

std::vector<std::pair<NodeId, NodeId>> ApollonianGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < node_count(); ++i) {
    for (NodeId j : neighbors(static_cast<NodeId>(i))) {
      if (i < j) out.emplace_back(static_cast<NodeId>(i), j);
    }
  }
  return out;
}

bool ApollonianGraph::operator==(const ApollonianGraph& other) const {
  return kind_ == other.kind_ && generation_ == other.generation_ && seed_ == other.seed_ &&
         offsets_ == other.offsets_ && neighbors_ == other.neighbors_ &&
         node_generation_ == other.node_generation_;
}

ApollonianGraph build_apollonian(int generation) {
  if (generation < 0) throw ParameterError("generation must be non-negative");
  if (generation > kMaxGeneration) {
    throw CapacityError("generation " + std::to_string(generation) + " exceeds cap " +
                        std::to_string(kMaxGeneration));
  }
  Builder builder;
  std::deque<Face> faces{{0, 1, 2}};
  for (int round = 1; round <= generation; ++round) {
    const std::size_t count = faces.size();
    for (std::size_t k = 0; k < count; ++k) {
      const Face face = faces.front();
      faces.pop_front();
      for (const Face& child : builder.subdivide(face, round)) faces.push_back(child);
    }
  }
  return std::move(builder).finish(GraphKind::kApollonian, generation, std::nullopt);
}

ApollonianGraph build_random_apollonian(int iterations, int subdivisions_per_iteration,
                                        std::uint64_t seed) {
  if (iterations < 1) throw ParameterError("iterations must be positive");
  if (subdivisions_per_iteration < 1) throw ParameterError("subdivisions must be positive");
  if (iterations > kMaxGeneration) {
    throw CapacityError("iterations " + std::to_string(iterations) + " exceeds cap " +
                        std::to_string(kMaxGeneration));
  }
  const auto requested = static_cast<std::size_t>(subdivisions_per_iteration);
  Rng rng(seed);
  Builder builder;
  std::vector<Face> pool{{0, 1, 2}};
  for (int round = 1; round <= iterations; ++round) {
    if (round == iterations && requested > pool.size()) {
      throw ParameterError("requested " + std::to_string(requested) +
                           " subdivisions but the final round has only " +
                           std::to_string(pool.size()) + " internal faces");
    }
    const std::size_t take = std::min(requested, pool.size());
    // Partial Fisher-Yates over pool positions.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t pick = k + rng.below(order.size() - k);
      std::swap(order[k], order[pick]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(chosen.begin(), chosen.end());

    std::vector<Face> next;
    std::vector<Face> children;
    std::size_t c = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (c < chosen.size() && chosen[c] == k) {
        for (const Face& child : builder.subdivide(pool[k], round)) children.push_back(child);
        ++c;
      } else {
        next.push_back(pool[k]);
      }
    }
    next.insert(next.end(), children.begin(), children.end());
    pool = std::move(next);
  }
  return std::move(builder).finish(GraphKind::kRandomApollonian, iterations, seed);
}

ClosedFormCounts closed_form_counts(int generation) {
  if (generation < 0) throw ParameterError("generation must be non-negative");
  // 6 * (3^K + 1) must fit in int64.
  if (generation > 36) throw CapacityError("closed-form counts overflow beyond K = 36");
  const std::uint64_t p = pow3(generation);
  ClosedFormCounts counts{};
  counts.nodes = (p + 5) / 2;
  counts.edges = 3 * (p + 1) / 2;
  if (generation >= 1) counts.max_degree = 3ULL << (generation - 1);
  counts.average_degree = {static_cast<std::int64_t>(6 * (p + 1)), static_cast<std::int64_t>(p + 5)};
  return counts;
}

std::vector<NodeId> nodes_of_generation(const ApollonianGraph& graph, int g) {
  if (g < 0 || g > graph.generation()) {
    throw ParameterError("generation " + std::to_string(g) + " outside [0, " +
                         std::to_string(graph.generation()) + "]");
  }
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (graph.node_generation(static_cast<NodeId>(i)) == g) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::string serialize(const ApollonianGraph& graph) {
  nlohmann::ordered_json doc;
  doc["kind"] = to_string(graph.kind());
  doc["generation"] = graph.generation();
  if (graph.seed()) {
    doc["seed"] = *graph.seed();
    doc["rng"] = Rng::kAlgorithm;
  }
  auto nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    nodes.push_back({{"id", i}, {"gen", graph.node_generation(static_cast<NodeId>(i))}});
  }
  doc["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
  doc["edges"] = std::move(edges);
  return doc.dump() + "\n";
}

namespace {

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(where + "." + key + ": wrong type");
  }
}

}  // namespace

ApollonianGraph deserialize(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("parse error at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError("document: expected an object");

  const auto kind_text = field<std::string>(doc, "kind", "document");
  GraphKind kind;
  if (kind_text == "apollonian") {
    kind = GraphKind::kApollonian;
  } else if (kind_text == "random_apollonian") {
    kind = GraphKind::kRandomApollonian;
  } else {
    throw FormatError("document.kind: unknown kind \"" + kind_text + "\"");
  }
  const int generation = field<int>(doc, "generation", "document");
  if (generation < 0 || generation > kMaxGeneration) {
    throw FormatError("document.generation: out of range");
  }
  std::optional<std::uint64_t> seed;
  if (doc.contains("seed") && !doc["seed"].is_null()) seed = field<std::uint64_t>(doc, "seed", "document");
  if (doc.contains("rng") && doc["rng"] != Rng::kAlgorithm) {
    throw FormatError("document.rng: unsupported generator");
  }

  const auto& nodes = doc.contains("nodes") ? doc["nodes"] : nlohmann::json();
  if (!nodes.is_array()) throw FormatError("document.nodes: expected an array");
  std::vector<int> labels;
  labels.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto id = field<std::uint64_t>(nodes[i], "id", where);
    if (id != i) throw FormatError(where + ".id: expected " + std::to_string(i));
    const int gen = field<int>(nodes[i], "gen", where);
    if (i > 0 && gen < labels.back()) throw FormatError(where + ".gen: labels must be non-decreasing");
    labels.push_back(gen);
  }

  const auto& edges = doc.contains("edges") ? doc["edges"] : nlohmann::json();
  if (!edges.is_array()) throw FormatError("document.edges: expected an array");
  std::vector<std::vector<NodeId>> adjacency(labels.size());
  std::pair<std::uint64_t, std::uint64_t> previous{0, 0};
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    const auto& e = edges[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      throw FormatError(where + ": expected [i, j] with non-negative integers");
    }
    const std::pair<std::uint64_t, std::uint64_t> edge{e[0].get<std::uint64_t>(), e[1].get<std::uint64_t>()};
    if (edge.first >= edge.second) throw FormatError(where + ": requires i < j");
    if (edge.second >= labels.size()) throw FormatError(where + ": node id out of range");
    if (k > 0 && edge == previous) throw FormatError(where + ": duplicate edge");
    if (k > 0 && edge < previous) throw FormatError(where + ": edges not sorted");
    previous = edge;
    adjacency[edge.first].push_back(static_cast<NodeId>(edge.second));
    adjacency[edge.second].push_back(static_cast<NodeId>(edge.first));
  }
  for (auto& row : adjacency) std::sort(row.begin(), row.end());

  ApollonianGraph graph(kind, generation, seed, std::move(adjacency), std::move(labels));
  if (kind == GraphKind::kApollonian) {
    const auto counts = closed_form_counts(generation);
    if (graph.node_count() != counts.nodes || graph.edge_count() != counts.edges) {
      throw FormatError("document: node/edge counts do not match generation " + std::to_string(generation));
    }
    for (int g = 0; g <= generation; ++g) {
      const std::size_t expected = g == 0 ? 3 : pow3(g - 1);
      if (nodes_of_generation(graph, g).size() != expected) {
        throw FormatError("document: generation " + std::to_string(g) + " has the wrong node count");
      }
    }
  }
  return graph;
}

}  // namespace apsearch
