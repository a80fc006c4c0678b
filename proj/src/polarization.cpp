#include "echolex/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "echolex/error.hpp"

namespace echolex {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::science: return "science";
    case Label::conspiracy: return "conspiracy";
    case Label::unpolarized: return "unpolarized";
  }
  return "unpolarized";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "science") return Label::science;
  if (s == "conspiracy") return Label::conspiracy;
  if (s == "unpolarized") return Label::unpolarized;
  return std::nullopt;
}

PolarizationTable::PolarizationTable(std::vector<UserPolarization> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
}

const UserPolarization* PolarizationTable::find(std::string_view user_id) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), user_id,
                             [](const UserPolarization& r, std::string_view id) { return r.user_id < id; });
  if (it == rows_.end() || it->user_id != user_id) return nullptr;
  return &*it;
}

Label PolarizationTable::label_of(std::string_view user_id) const {
  const auto* row = find(user_id);
  return row ? row->label : Label::unpolarized;
}

PolarizationTable compute_polarization(const Corpus& corpus) {
  std::vector<UserPolarization> rows;
  std::int64_t max_theta = 0;
  for (UserIndex u = 0; u < corpus.users().size(); ++u) {
    auto likes = corpus.user_likes(u);
    if (likes.empty()) continue;
    UserPolarization r;
    r.user_id = corpus.users()[u];
    r.theta = static_cast<std::int64_t>(likes.size());
    for (auto l : likes)
      if (corpus.post_category(corpus.like_post(l)) == Category::conspiracy) ++r.conspiracy_likes;
    r.rho = static_cast<double>(r.conspiracy_likes) / static_cast<double>(r.theta);
    r.sigma = 2.0 * r.rho - 1.0;
    max_theta = std::max(max_theta, r.theta);
    rows.push_back(std::move(r));
  }
  for (auto& r : rows) r.psi = static_cast<double>(r.theta) / static_cast<double>(max_theta);
  return label_users(PolarizationTable(std::move(rows)), kDefaultPolarizationThreshold);
}

PolarizationTable label_users(const PolarizationTable& table, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw InvalidArgument("label_users: threshold must lie in (0, 1]");
  PolarizationTable out = table;
  out.threshold_ = threshold;
  for (auto& r : out.rows_) {
    if (r.sigma <= -threshold) r.label = Label::science;
    else if (r.sigma >= threshold) r.label = Label::conspiracy;
    else r.label = Label::unpolarized;
  }
  return out;
}

stats::Histogram polarization_pdf(const PolarizationTable& table, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("polarization_pdf: bins must be positive");
  std::vector<double> sigmas;
  sigmas.reserve(table.size());
  for (const auto& r : table.rows()) sigmas.push_back(r.sigma);
  return stats::histogram(sigmas, -1.0, 1.0, bins);
}

namespace {

template <class Key>
std::vector<FractionBin> aggregate(const std::vector<UserCommentFraction>& users, Key key,
                                   const std::vector<double>& edges) {
  std::vector<FractionBin> out;
  for (Label label : {Label::science, Label::conspiracy}) {
    std::vector<double> sums(edges.size() - 1, 0.0);
    std::vector<std::int64_t> counts(edges.size() - 1, 0);
    for (const auto& u : users) {
      if (u.label != label) continue;
      const double k = key(u);
      auto it = std::upper_bound(edges.begin(), edges.end(), k);
      auto idx = static_cast<std::size_t>(std::distance(edges.begin(), it));
      idx = std::clamp<std::size_t>(idx, 1, edges.size() - 1) - 1;
      sums[idx] += u.fraction;
      ++counts[idx];
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (counts[i] == 0) continue;
      out.push_back({label, edges[i], edges[i + 1], counts[i],
                     sums[i] / static_cast<double>(counts[i])});
    }
  }
  return out;
}

}  // namespace

CommentFractionSeries comment_fraction_by_engagement(const Corpus& corpus,
                                                     const PolarizationTable& table,
                                                     std::size_t bins_per_decade) {
  if (bins_per_decade == 0)
    throw InvalidArgument("comment_fraction_by_engagement: bins_per_decade must be positive");
  CommentFractionSeries out;
  double min_psi = 1.0;
  std::int64_t max_comments = 1;
  for (const auto& row : table.rows()) {
    if (row.label == Label::unpolarized) continue;
    auto u = corpus.find_user(row.user_id);
    if (!u) continue;
    auto comments = corpus.user_comments(*u);
    if (comments.empty()) continue;
    const Category own = row.label == Label::science ? Category::science : Category::conspiracy;
    UserCommentFraction f;
    f.user_id = row.user_id;
    f.label = row.label;
    f.psi = row.psi;
    f.comments = static_cast<std::int64_t>(comments.size());
    for (auto c : comments)
      if (corpus.post_category(corpus.comment_post(c)) == own) ++f.own_comments;
    f.fraction = static_cast<double>(f.own_comments) / static_cast<double>(f.comments);
    min_psi = std::min(min_psi, f.psi);
    max_comments = std::max(max_comments, f.comments);
    out.users.push_back(std::move(f));
  }
  if (out.users.empty()) return out;

  // psi bins: right-anchored at 1 so the most engaged users close the last bin.
  std::vector<double> psi_edges{1.0};
  const double step = std::pow(10.0, -1.0 / static_cast<double>(bins_per_decade));
  do {
    psi_edges.push_back(psi_edges.back() * step);
  } while (psi_edges.back() > min_psi);
  std::reverse(psi_edges.begin(), psi_edges.end());
  psi_edges.back() = std::nextafter(1.0, 2.0);

  std::vector<double> count_edges{1.0};
  while (count_edges.back() <= static_cast<double>(max_comments))
    count_edges.push_back(count_edges.back() * 2.0);

  out.by_engagement =
      aggregate(out.users, [](const UserCommentFraction& u) { return u.psi; }, psi_edges);
  for (auto& b : out.by_engagement) b.hi = std::min(b.hi, 1.0);
  out.by_comments = aggregate(
      out.users, [](const UserCommentFraction& u) { return static_cast<double>(u.comments); },
      count_edges);
  return out;
}

}  // namespace echolex
