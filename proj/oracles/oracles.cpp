#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "echolex/convergence.hpp"
#include "echolex/graph.hpp"
#include "echolex/lexicon.hpp"
#include "echolex/stats.hpp"

namespace echolex::oracles {

double cosine(const std::map<std::uint32_t, double>& a, const std::map<std::uint32_t, double>& b) {
  std::set<std::uint32_t> keys;
  for (const auto& [k, _] : a) keys.insert(k);
  for (const auto& [k, _] : b) keys.insert(k);
  double dot = 0, na = 0, nb = 0;
  for (auto k : keys) {
    const double x = a.count(k) ? a.at(k) : 0.0;
    const double y = b.count(k) ? b.at(k) : 0.0;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return dot / std::sqrt(na * nb);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double smaller = 0, equal = 0;
    for (double x : v) {
      if (x < v[i]) smaller += 1;
      else if (x == v[i]) equal += 1;
    }
    r[i] = 1 + smaller + (equal - 1) / 2;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Fit wls(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  // Normal equations [a b; b c] beta = [d; e].
  double a = 0, b = 0, c = 0, d = 0, e = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a += w[i];
    b += w[i] * x[i];
    c += w[i] * x[i] * x[i];
    d += w[i] * y[i];
    e += w[i] * x[i] * y[i];
    if (w[i] > 0) ++n;
  }
  const double det = a * c - b * b;
  const double i00 = c / det, i01 = -b / det, i11 = a / det;
  Fit f{};
  f.beta0 = i00 * d + i01 * e;
  f.beta1 = i01 * d + i11 * e;
  double ssr = 0, sst = 0;
  const double ybar = d / a;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.beta0 - f.beta1 * x[i];
    ssr += w[i] * r * r;
    sst += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  const double s2 = ssr / static_cast<double>(n - 2);
  f.se0 = std::sqrt(s2 * i00);
  f.se1 = std::sqrt(s2 * i11);
  f.r2 = sst > 0 ? 1 - ssr / sst : 1.0;
  return f;
}

std::vector<Edge> backbone(std::size_t vertices, const std::vector<Edge>& edges, double alpha) {
  auto passes = [&](std::uint32_t i, double w) {
    double s = 0;
    int k = 0;
    for (const auto& [a, b, wt] : edges)
      if (a == i || b == i) {
        s += static_cast<double>(wt);
        ++k;
      }
    return k >= 2 && std::pow(1 - w / s, k - 1) < alpha;
  };
  (void)vertices;
  std::vector<Edge> out;
  for (const auto& e : edges) {
    const auto [u, v, w] = e;
    if (passes(u, static_cast<double>(w)) || passes(v, static_cast<double>(w))) out.push_back(e);
  }
  return out;
}

std::map<std::pair<std::string, std::string>, std::int64_t> interaction_levels(const Corpus& corpus) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  const auto users = corpus.users();
  for (std::size_t a = 0; a < users.size(); ++a)
    for (std::size_t b = a + 1; b < users.size(); ++b) {
      std::int64_t level = 0;
      for (const auto& post : corpus.posts()) {
        std::int64_t ca = 0, cb = 0;
        for (const auto& c : corpus.comments()) {
          if (c.post_id != post.id) continue;
          if (c.user_id == users[a]) ++ca;
          if (c.user_id == users[b]) ++cb;
        }
        level += std::min(ca, cb);
      }
      if (level > 0) out[{users[a], users[b]}] = level;
    }
  return out;
}

double ccdf_at(const std::vector<double>& values, double x) {
  double k = 0;
  for (double v : values)
    if (v >= x) k += 1;
  return k / static_cast<double>(values.size());
}

namespace {

void note(SuiteResult& r, double deviation, double tolerance) {
  ++r.cases;
  if (!(deviation <= tolerance)) ++r.failures;
  if (!(deviation <= r.worst)) r.worst = deviation;
}

SuiteResult cosine_suite(std::mt19937_64& rng) {
  SuiteResult r{"lexical_convergence vs naive cosine", 0, 0, 0};
  std::uniform_int_distribution<int> size(1, 30), term(0, 60), count(1, 9);
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::pair<TermId, std::int64_t>> ca, cb;
    for (int i = size(rng); i > 0; --i) ca.emplace_back(term(rng), count(rng));
    for (int i = size(rng); i > 0; --i) cb.emplace_back(term(rng), count(rng));
    const auto a = BagOfWords::from_counts(ca), b = BagOfWords::from_counts(cb);
    std::map<std::uint32_t, double> ma, mb;
    for (auto [t, c] : ca) ma[t] += static_cast<double>(c);
    for (auto [t, c] : cb) mb[t] += static_cast<double>(c);
    note(r, std::abs(lexical_convergence(a, b) - cosine(ma, mb)), 1e-12);
  }
  return r;
}

SuiteResult spearman_suite(std::mt19937_64& rng) {
  SuiteResult r{"spearman vs exhaustive ranks", 0, 0, 0};
  std::uniform_int_distribution<int> len(3, 50), levels(2, 12);
  for (int k = 0; k < 500; ++k) {
    const int n = len(rng);
    std::uniform_int_distribution<int> value(0, levels(rng));
    std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
    bool x_const = true, y_const = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = value(rng);
      y[i] = value(rng);
      x_const = x_const && x[i] == x[0];
      y_const = y_const && y[i] == y[0];
    }
    if (x_const) x[0] += 1;
    if (y_const) y[0] += 1;
    note(r, std::abs(stats::spearman(x, y).r_s - spearman(x, y)), 1e-12);
  }
  return r;
}

SuiteResult wls_suite(std::mt19937_64& rng) {
  SuiteResult r{"wls_fit vs normal equations", 0, 0, 0};
  std::uniform_int_distribution<int> len(3, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int n = len(rng);
    std::vector<double> x, y, w;
    const double b0 = unit(rng) * 4 - 2, b1 = unit(rng) * 4 - 2;
    for (int i = 0; i < n; ++i) {
      x.push_back(std::log(1.0 + 30 * unit(rng)));
      y.push_back(b0 + b1 * x.back() + unit(rng) - 0.5);
      w.push_back(1 + std::floor(20 * unit(rng)));
    }
    const auto lib = stats::wls_fit(x, y, w);
    const auto ref = wls(x, y, w);
    for (double d : {lib.beta0 - ref.beta0, lib.beta1 - ref.beta1, lib.se0 - ref.se0, lib.se1 - ref.se1,
                     lib.r2 - ref.r2})
      note(r, std::abs(d), 1e-10);
  }
  return r;
}

SuiteResult backbone_suite(std::mt19937_64& rng) {
  SuiteResult r{"disparity_backbone vs closed form", 0, 0, 0};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::uint32_t n = 50;
    std::vector<std::string> names;
    for (std::uint32_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(100 + i));
    std::vector<InteractionEdge> edges;
    std::vector<Edge> plain;
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = a + 1; b < n; ++b)
        if (unit(rng) < 0.1) {
          const auto w = static_cast<std::int64_t>(1 + std::floor(std::pow(50.0, unit(rng))));
          edges.push_back({a, b, w, std::nullopt});
          plain.emplace_back(a, b, w);
        }
    const InteractionGraph g(names, edges);
    for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
      const auto lib = disparity_backbone(g, alpha);
      const auto ref = backbone(n, plain, alpha);
      std::vector<Edge> got;
      for (const auto& e : lib.edges()) got.emplace_back(e.u, e.v, e.weight);
      note(r, got == ref ? 0.0 : 1.0, 0.0);
    }
  }
  return r;
}

SuiteResult projection_suite(std::mt19937_64& rng) {
  SuiteResult r{"build_interaction_graph vs all-pairs recount", 0, 0, 0};
  std::uniform_int_distribution<int> users(2, 12), posts(1, 8), comments(0, 40);
  for (int k = 0; k < 20; ++k) {
    const int nu = users(rng), np = posts(rng);
    std::vector<Page> pages{{"pg", Category::science}};
    std::vector<Post> ps;
    for (int p = 0; p < np; ++p) ps.push_back({"p" + std::to_string(p), "pg", 0});
    std::vector<Comment> cs;
    std::uniform_int_distribution<int> pick_u(0, nu - 1), pick_p(0, np - 1);
    for (int c = comments(rng); c > 0; --c)
      cs.push_back({"c" + std::to_string(c), "p" + std::to_string(pick_p(rng)), "u" + std::to_string(pick_u(rng)),
                    c, ""});
    const auto corpus = Corpus::from_records(pages, ps, cs, {});
    const auto g = build_interaction_graph(corpus);
    std::map<std::pair<std::string, std::string>, std::int64_t> got;
    for (const auto& e : g.edges()) got[{g.name(e.u), g.name(e.v)}] = e.weight;
    note(r, got == interaction_levels(corpus) ? 0.0 : 1.0, 0.0);
  }
  return r;
}

}  // namespace

std::vector<SuiteResult> run_suite(std::uint64_t seed, std::ostream* log) {
  std::mt19937_64 rng(seed);
  std::vector<SuiteResult> out;
  out.push_back(cosine_suite(rng));
  out.push_back(spearman_suite(rng));
  out.push_back(wls_suite(rng));
  out.push_back(backbone_suite(rng));
  out.push_back(projection_suite(rng));
  if (log)
    for (const auto& r : out)
      *log << (r.failures ? "FAIL " : "ok   ") << r.name << ": " << r.cases << " cases, " << r.failures
           << " failures, worst deviation " << r.worst << "\n";
  return out;
}

}  // namespace echolex::oracles
