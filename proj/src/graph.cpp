#include "echolex/graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "echolex/error.hpp"
#include "echolex/parallel.hpp"

namespace echolex {

std::string_view to_string(InteractionType t) {
  switch (t) {
    case InteractionType::science_science: return "science_science";
    case InteractionType::cross: return "cross";
    case InteractionType::conspiracy_conspiracy: return "conspiracy_conspiracy";
  }
  return "cross";
}

std::optional<InteractionType> parse_interaction_type(std::string_view s) {
  for (auto t : kInteractionTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<InteractionType> interaction_type(Label a, Label b) {
  if (a == Label::unpolarized || b == Label::unpolarized) return std::nullopt;
  if (a != b) return InteractionType::cross;
  return a == Label::science ? InteractionType::science_science
                             : InteractionType::conspiracy_conspiracy;
}

BipartiteGraph build_bipartite(const Corpus& corpus) {
  BipartiteGraph g;
  std::vector<std::uint32_t> commenter_of_user(corpus.users().size(), UINT32_MAX);
  for (UserIndex u = 0; u < corpus.users().size(); ++u) {
    if (corpus.user_comments(u).empty()) continue;
    commenter_of_user[u] = static_cast<std::uint32_t>(g.commenters.size());
    g.commenters.push_back(corpus.users()[u]);
  }
  g.posts.reserve(corpus.posts().size());
  for (const auto& p : corpus.posts()) g.posts.push_back(p.id);

  std::vector<std::uint32_t> users;
  for (PostIndex p = 0; p < corpus.posts().size(); ++p) {
    users.clear();
    for (auto c : corpus.post_comments(p)) users.push_back(commenter_of_user[corpus.comment_user(c)]);
    std::sort(users.begin(), users.end());
    for (std::size_t i = 0; i < users.size();) {
      std::size_t j = i;
      while (j < users.size() && users[j] == users[i]) ++j;
      g.edges.push_back({users[i], p, static_cast<std::int64_t>(j - i)});
      i = j;
    }
  }
  return g;
}

std::int64_t interaction_level(const PostCounts& a, const PostCounts& b) {
  std::int64_t level = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      if (ia->second > 0 && ib->second > 0) level += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return level;
}

InteractionGraph::InteractionGraph(std::vector<std::string> vertices,
                                   std::vector<InteractionEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  if (!std::is_sorted(vertices_.begin(), vertices_.end()) ||
      std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
    throw InvalidArgument("InteractionGraph: vertices must be sorted and unique");
  for (auto& e : edges_) {
    if (e.u == e.v) throw InvalidArgument("InteractionGraph: self loop on '" + vertices_.at(e.u) + "'");
    if (e.u >= vertices_.size() || e.v >= vertices_.size())
      throw InvalidArgument("InteractionGraph: endpoint out of range");
    if (e.weight < 1) throw InvalidArgument("InteractionGraph: edge weight must be >= 1");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
      throw InvalidArgument("InteractionGraph: duplicate edge");
}

std::optional<std::uint32_t> InteractionGraph::find_vertex(std::string_view id) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id);
  if (it == vertices_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - vertices_.begin());
}

const InteractionEdge* InteractionGraph::find_edge(std::string_view a, std::string_view b) const {
  auto x = find_vertex(a), y = find_vertex(b);
  if (!x || !y || *x == *y) return nullptr;
  auto u = std::min(*x, *y), v = std::max(*x, *y);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(u, v),
                             [](const InteractionEdge& e, const std::pair<std::uint32_t, std::uint32_t>& k) {
                               return std::pair(e.u, e.v) < k;
                             });
  if (it == edges_.end() || it->u != u || it->v != v) return nullptr;
  return &*it;
}

InteractionGraph build_interaction_graph(const Corpus& corpus, unsigned threads) {
  const BipartiteGraph bip = build_bipartite(corpus);

  // Post boundaries inside the (post, commenter)-sorted edge list.
  std::vector<std::size_t> post_begin;
  for (std::size_t i = 0; i < bip.edges.size(); ++i)
    if (i == 0 || bip.edges[i].post != bip.edges[i - 1].post) post_begin.push_back(i);
  post_begin.push_back(bip.edges.size());
  const std::size_t n_posts = post_begin.size() - 1;

  using PairCounts = std::unordered_map<std::uint64_t, std::int64_t>;
  const std::size_t blocks = std::max(1u, threads);
  std::vector<PairCounts> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    auto& counts = partial[b];
    const std::size_t first = n_posts * b / blocks, last = n_posts * (b + 1) / blocks;
    for (std::size_t p = first; p < last; ++p) {
      for (std::size_t i = post_begin[p]; i < post_begin[p + 1]; ++i) {
        for (std::size_t j = i + 1; j < post_begin[p + 1]; ++j) {
          const auto& a = bip.edges[i];
          const auto& c = bip.edges[j];
          const std::uint64_t key = (std::uint64_t{a.commenter} << 32) | c.commenter;
          counts[key] += std::min(a.multiplicity, c.multiplicity);
        }
      }
    }
  });
  PairCounts merged = std::move(partial[0]);
  for (std::size_t b = 1; b < blocks; ++b)
    for (const auto& [k, w] : partial[b]) merged[k] += w;

  std::vector<InteractionEdge> edges;
  edges.reserve(merged.size());
  for (const auto& [k, w] : merged)
    edges.push_back({static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k & 0xffffffffu), w,
                     std::nullopt});
  return InteractionGraph(bip.commenters, std::move(edges));
}

InteractionGraph filter_polarized(const InteractionGraph& graph, const PolarizationTable& table,
                                  std::int64_t min_weight) {
  if (min_weight < 1) throw InvalidArgument("filter_polarized: min_weight must be >= 1");
  std::vector<Label> labels;
  std::vector<std::uint32_t> remap(graph.vertices().size(), UINT32_MAX);
  std::vector<std::string> kept;
  for (std::uint32_t i = 0; i < graph.vertices().size(); ++i) {
    const Label l = table.label_of(graph.vertices()[i]);
    labels.push_back(l);
    if (l == Label::unpolarized) continue;
    remap[i] = static_cast<std::uint32_t>(kept.size());
    kept.push_back(graph.vertices()[i]);
  }
  std::vector<InteractionEdge> edges;
  for (const auto& e : graph.edges()) {
    if (e.weight < min_weight) continue;
    auto tag = interaction_type(labels[e.u], labels[e.v]);
    if (!tag) continue;
    edges.push_back({remap[e.u], remap[e.v], e.weight, tag});
  }
  return InteractionGraph(std::move(kept), std::move(edges));
}

std::vector<WeightCcdf> weight_ccdf(const InteractionGraph& graph, bool by_tag) {
  if (graph.edges().empty()) throw InvalidArgument("weight_ccdf: graph has no edges");
  std::vector<WeightCcdf> out;
  auto series = [&](std::optional<InteractionType> tag) {
    std::vector<double> w;
    for (const auto& e : graph.edges())
      if (!tag || e.tag == tag) w.push_back(static_cast<double>(e.weight));
    if (!w.empty()) out.push_back({tag, stats::ccdf(w)});
  };
  if (!by_tag) {
    series(std::nullopt);
  } else {
    for (auto t : kInteractionTypes) series(t);
  }
  return out;
}

InteractionGraph disparity_backbone(const InteractionGraph& graph, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("disparity_backbone: alpha must lie in (0, 1)");
  const auto n = graph.vertices().size();
  std::vector<double> strength(n, 0.0);
  std::vector<std::int64_t> degree(n, 0);
  for (const auto& e : graph.edges()) {
    strength[e.u] += static_cast<double>(e.weight);
    strength[e.v] += static_cast<double>(e.weight);
    ++degree[e.u];
    ++degree[e.v];
  }
  auto significant = [&](std::uint32_t i, double w) {
    if (degree[i] < 2) return false;
    const double p = w / strength[i];
    return std::pow(1.0 - p, static_cast<double>(degree[i] - 1)) < alpha;
  };
  std::vector<InteractionEdge> kept;
  for (const auto& e : graph.edges()) {
    const double w = static_cast<double>(e.weight);
    if (significant(e.u, w) || significant(e.v, w)) kept.push_back(e);
  }
  return InteractionGraph(std::vector<std::string>(graph.vertices().begin(), graph.vertices().end()),
                          std::move(kept));
}

}  // namespace echolex
