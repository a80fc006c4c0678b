#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echolex/corpus.hpp"
#include "echolex/polarization.hpp"
#include "echolex/stats.hpp"

namespace echolex {

enum class InteractionType : std::uint8_t { science_science, cross, conspiracy_conspiracy };

inline constexpr InteractionType kInteractionTypes[] = {
    InteractionType::science_science, InteractionType::cross, InteractionType::conspiracy_conspiracy};

std::string_view to_string(InteractionType t);
std::optional<InteractionType> parse_interaction_type(std::string_view s);

/// Tag of an edge between two polarized users; nullopt if either is unpolarized.
std::optional<InteractionType> interaction_type(Label a, Label b);

/// Commenter-post graph; edge multiplicity is the number of comments the user
/// left on the post.
struct BipartiteGraph {
  struct Edge {
    std::uint32_t commenter = 0;  ///< index into `commenters`
    PostIndex post = 0;           ///< index into `posts`
    std::int64_t multiplicity = 0;
  };
  std::vector<std::string> commenters;  ///< sorted user ids with at least one comment
  std::vector<std::string> posts;       ///< every post id, in corpus order
  std::vector<Edge> edges;              ///< sorted by (post, commenter)
};

BipartiteGraph build_bipartite(const Corpus& corpus);

/// Per-post comment counts of one user, keyed by post id.
using PostCounts = std::map<std::string, std::int64_t>;

/// Sum over co-commented posts of the smaller of the two per-post comment counts.
std::int64_t interaction_level(const PostCounts& a, const PostCounts& b);

struct InteractionEdge {
  std::uint32_t u = 0;  ///< vertex index, always u < v
  std::uint32_t v = 0;
  std::int64_t weight = 0;
  std::optional<InteractionType> tag;

  friend bool operator==(const InteractionEdge&, const InteractionEdge&) = default;
};

/// Undirected weighted co-commenter network. Vertices are user ids, sorted;
/// edges are sorted by (u, v) with u < v and carry their interaction level.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  /// Normalizes endpoint order and sorts edges. Throws InvalidArgument on a
  /// self loop, an out-of-range endpoint, a duplicate pair or weight < 1.
  InteractionGraph(std::vector<std::string> vertices, std::vector<InteractionEdge> edges);

  std::span<const std::string> vertices() const { return vertices_; }
  std::span<const InteractionEdge> edges() const { return edges_; }
  const std::string& name(std::uint32_t v) const { return vertices_[v]; }
  std::optional<std::uint32_t> find_vertex(std::string_view id) const;
  /// Edge between two users, if any.
  const InteractionEdge* find_edge(std::string_view a, std::string_view b) const;

  friend bool operator==(const InteractionGraph&, const InteractionGraph&) = default;

 private:
  std::vector<std::string> vertices_;
  std::vector<InteractionEdge> edges_;
};

/// Projection of the bipartite graph onto commenters. Posts are split into
/// `threads` contiguous blocks whose pair counts are merged, so the result is
/// independent of the thread count.
InteractionGraph build_interaction_graph(const Corpus& corpus, unsigned threads = 1);

/// Induced subgraph on polarized users keeping edges with weight >= min_weight,
/// each tagged with its interaction type. Throws InvalidArgument if min_weight < 1.
InteractionGraph filter_polarized(const InteractionGraph& graph, const PolarizationTable& table,
                                  std::int64_t min_weight = 3);

struct WeightCcdf {
  std::optional<InteractionType> tag;  ///< nullopt: all edges together
  std::vector<stats::CcdfPoint> points;
};

/// CCDF of edge weights, overall or per tag (tags without edges are omitted).
/// Throws InvalidArgument for a graph without edges.
std::vector<WeightCcdf> weight_ccdf(const InteractionGraph& graph, bool by_tag);

/// Disparity-filter backbone: an edge survives when, at some endpoint i with
/// degree k_i >= 2 and strength s_i, (1 - w / s_i)^(k_i - 1) < alpha.
/// Degree-one endpoints never decide. Throws InvalidArgument unless 0 < alpha < 1.
InteractionGraph disparity_backbone(const InteractionGraph& graph, double alpha);

}  // namespace echolex
