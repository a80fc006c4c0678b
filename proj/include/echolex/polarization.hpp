#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echolex/corpus.hpp"
#include "echolex/stats.hpp"

namespace echolex {

enum class Label : std::uint8_t { science, conspiracy, unpolarized };

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

inline constexpr double kDefaultPolarizationThreshold = 0.95;

/// Like-based polarization of one user.
struct UserPolarization {
  std::string user_id;
  std::int64_t theta = 0;             ///< total likes
  std::int64_t conspiracy_likes = 0;  ///< likes on conspiracy-page posts
  double rho = 0;                     ///< conspiracy_likes / theta
  double sigma = 0;                   ///< 2 rho - 1
  double psi = 0;                     ///< theta / max theta
  Label label = Label::unpolarized;
};

/// Users with at least one like, sorted by user id.
class PolarizationTable {
 public:
  PolarizationTable() = default;
  explicit PolarizationTable(std::vector<UserPolarization> rows);

  std::span<const UserPolarization> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const UserPolarization* find(std::string_view user_id) const;
  /// Label of a user; users absent from the table (no likes) are unpolarized.
  Label label_of(std::string_view user_id) const;

  double threshold() const { return threshold_; }

 private:
  friend PolarizationTable label_users(const PolarizationTable&, double);
  std::vector<UserPolarization> rows_;
  double threshold_ = kDefaultPolarizationThreshold;
};

/// Builds the table for every user with a like, labelled at the default threshold.
PolarizationTable compute_polarization(const Corpus& corpus);

/// science iff sigma <= -threshold, conspiracy iff sigma >= threshold.
/// Throws InvalidArgument unless 0 < threshold <= 1.
PolarizationTable label_users(const PolarizationTable& table, double threshold);

/// Density of sigma over `bins` equal-width bins spanning [-1, 1].
/// Throws InvalidArgument when bins == 0; an empty table gives an empty histogram.
stats::Histogram polarization_pdf(const PolarizationTable& table, std::size_t bins);

/// Share of a labelled user's comments that fall on posts of their own community.
struct UserCommentFraction {
  std::string user_id;
  Label label = Label::unpolarized;
  double psi = 0;
  std::int64_t comments = 0;
  std::int64_t own_comments = 0;
  double fraction = 0;
};

/// Mean own-community fraction of the users whose key falls in [lo, hi).
struct FractionBin {
  Label label = Label::unpolarized;
  double lo = 0, hi = 0;
  std::int64_t users = 0;
  double mean_fraction = 0;
};

struct CommentFractionSeries {
  std::vector<UserCommentFraction> users;
  std::vector<FractionBin> by_engagement;  ///< logarithmic bins of psi
  std::vector<FractionBin> by_comments;    ///< logarithmic (base 2) bins of comment count
};

/// Own-community comment fraction for every polarized user with at least one
/// comment, aggregated per community over logarithmic bins of engagement
/// (`bins_per_decade` per factor of ten, ending at psi = 1) and of comment count
/// (powers of two).
CommentFractionSeries comment_fraction_by_engagement(const Corpus& corpus,
                                                     const PolarizationTable& table,
                                                     std::size_t bins_per_decade = 4);

}  // namespace echolex
