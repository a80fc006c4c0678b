#include "echolex/pipeline.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "echolex/csv.hpp"

namespace echolex {

namespace detail {
extern const std::string_view kDefaultStopwordsText;
}

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(std::int64_t x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

class CsvFile {
 public:
  CsvFile(const fs::path& dir, std::string name, const std::vector<std::string>& header,
          std::vector<std::string>& written)
      : out_(dir / name, std::ios::binary) {
    if (!out_) throw Error("cannot write '" + (dir / name).string() + "'");
    written.push_back(std::move(name));
    csv::write_row(out_, header);
  }
  void row(const std::vector<std::string>& fields) { csv::write_row(out_, fields); }

 private:
  std::ofstream out_;
};

void write_text(const fs::path& dir, std::string name, const std::string& text,
                std::vector<std::string>& written) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
  out << text;
  written.push_back(std::move(name));
}

std::string label_name(Label l) { return std::string(to_string(l)); }
std::string tag_name(const std::optional<InteractionType>& t) {
  return t ? std::string(to_string(*t)) : std::string("all");
}

std::vector<std::string> fit_fields(const std::optional<stats::RegressionFit>& fit) {
  if (!fit) return {"", "", "", "", "", ""};
  return {format_number(fit->beta0), format_number(fit->beta1), format_number(fit->se0),
          format_number(fit->se1),   format_number(fit->r2),    format_number(fit->p1)};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Hash of the corpus input; a CSV directory hashes its four files by name.
std::string input_hash(const fs::path& input) {
  if (!fs::is_directory(input)) return sha256_file(input);
  std::string joined;
  for (const char* name : {"pages.csv", "posts.csv", "comments.csv", "likes.csv"}) {
    const fs::path p = input / name;
    joined += name;
    joined += ':';
    joined += fs::exists(p) ? sha256_file(p) : std::string("absent");
    joined += '\n';
  }
  return sha256_hex(joined);
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::polarize: return "polarize";
    case Stage::graph: return "graph";
    case Stage::ccdf: return "ccdf";
    case Stage::backbone: return "backbone";
    case Stage::vocab: return "vocab";
    case Stage::lex: return "lex";
    case Stage::converge: return "converge";
    case Stage::temporal: return "temporal";
    case Stage::permtest: return "permtest";
  }
  return "ingest";
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

struct Pipeline::Cache {
  std::optional<Corpus> corpus;
  std::optional<PolarizationTable> polarization;
  std::optional<InteractionGraph> full_graph, graph;
  std::optional<PipelineConfig> text_config;
  std::optional<TokenizedCorpus> tokens;
  std::optional<UserBows> bows;
  std::optional<StaticAnalysis> static_result;
};

Pipeline::Pipeline(fs::path input, PipelineOptions options)
    : input_(std::move(input)), options_(std::move(options)), cache_(std::make_unique<Cache>()) {}

Pipeline::~Pipeline() = default;

const Corpus& Pipeline::corpus() {
  if (!cache_->corpus)
    cache_->corpus = options_.format ? load_corpus(input_, *options_.format) : load_corpus(input_);
  return *cache_->corpus;
}

const PolarizationTable& Pipeline::polarization() {
  if (!cache_->polarization) cache_->polarization = label_users(compute_polarization(corpus()), options_.threshold);
  return *cache_->polarization;
}

const InteractionGraph& Pipeline::full_graph() {
  if (!cache_->full_graph) cache_->full_graph = build_interaction_graph(corpus(), options_.threads);
  return *cache_->full_graph;
}

const InteractionGraph& Pipeline::graph() {
  if (!cache_->graph) cache_->graph = filter_polarized(full_graph(), polarization(), options_.min_weight);
  return *cache_->graph;
}

const PipelineConfig& Pipeline::text_config() {
  if (!cache_->text_config) {
    PipelineConfig c;
    c.stopwords = options_.stopwords ? load_stopwords(*options_.stopwords) : default_stopwords();
    if (options_.lemmas) c.lemmas = load_lemmas(*options_.lemmas);
    cache_->text_config = std::move(c);
  }
  return *cache_->text_config;
}

const TokenizedCorpus& Pipeline::tokens() {
  if (!cache_->tokens) cache_->tokens = tokenize_corpus(corpus(), text_config(), options_.threads);
  return *cache_->tokens;
}

const UserBows& Pipeline::bows() {
  if (!cache_->bows) cache_->bows = build_user_bows(corpus(), tokens());
  return *cache_->bows;
}

const StaticAnalysis& Pipeline::static_result() {
  if (!cache_->static_result) cache_->static_result = static_analysis(graph(), bows(), corpus(), options_.threads);
  return *cache_->static_result;
}

StageFiles Pipeline::write_stage(Stage stage, const fs::path& dir) {
  StageFiles result{stage, {}};
  auto& files = result.files;
  try {
    fs::create_directories(dir);
    switch (stage) {
      case Stage::ingest: {
        const auto t = corpus_stats(corpus());
        CsvFile f(dir, "breakdown.csv", {"row", "total", "science", "conspiracy"}, files);
        const std::pair<const char*, const BreakdownRow*> rows[] = {
            {"pages", &t.pages},       {"posts", &t.posts},   {"likes", &t.likes},
            {"comments", &t.comments}, {"likers", &t.likers}, {"commenters", &t.commenters}};
        for (const auto& [name, r] : rows) f.row({name, num(r->total), num(r->science), num(r->conspiracy)});
        f.row({"unique_likers", num(t.unique_likers), "", ""});
        f.row({"unique_commenters", num(t.unique_commenters), "", ""});
        break;
      }
      case Stage::polarize: {
        const auto& table = polarization();
        {
          CsvFile f(dir, "polarization.csv",
                    {"user_id", "theta", "conspiracy_likes", "rho", "sigma", "psi", "label"}, files);
          for (const auto& r : table.rows())
            f.row({r.user_id, num(r.theta), num(r.conspiracy_likes), format_number(r.rho),
                   format_number(r.sigma), format_number(r.psi), label_name(r.label)});
        }
        {
          const auto h = polarization_pdf(table, options_.bins);
          CsvFile f(dir, "polarization_pdf.csv", {"lo", "hi", "count", "density"}, files);
          for (std::size_t b = 0; b < h.bins(); ++b)
            f.row({format_number(h.edges[b]), format_number(h.edges[b + 1]), num(h.counts[b]),
                   format_number(h.density[b])});
        }
        {
          const auto s = comment_fraction_by_engagement(corpus(), table);
          CsvFile f(dir, "engagement.csv", {"axis", "label", "lo", "hi", "users", "mean_fraction"}, files);
          for (const auto& b : s.by_engagement)
            f.row({"psi", label_name(b.label), format_number(b.lo), format_number(b.hi), num(b.users),
                   format_number(b.mean_fraction)});
          for (const auto& b : s.by_comments)
            f.row({"comments", label_name(b.label), format_number(b.lo), format_number(b.hi), num(b.users),
                   format_number(b.mean_fraction)});
        }
        break;
      }
      case Stage::graph: {
        const auto& g = graph();
        {
          CsvFile f(dir, "edges.csv", {"u", "v", "weight", "tag"}, files);
          for (const auto& e : g.edges()) f.row({g.name(e.u), g.name(e.v), num(e.weight), tag_name(e.tag)});
        }
        CsvFile f(dir, "graph_summary.csv", {"scope", "vertices", "edges"}, files);
        f.row({"commenters", num(full_graph().vertices().size()), num(full_graph().edges().size())});
        f.row({"polarized", num(g.vertices().size()), num(g.edges().size())});
        for (auto t : kInteractionTypes) {
          std::vector<std::uint32_t> touched;
          std::size_t edges = 0;
          for (const auto& e : g.edges())
            if (e.tag == t) {
              ++edges;
              touched.push_back(e.u);
              touched.push_back(e.v);
            }
          std::sort(touched.begin(), touched.end());
          touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
          f.row({std::string(to_string(t)), num(touched.size()), num(edges)});
        }
        break;
      }
      case Stage::ccdf: {
        CsvFile f(dir, "ccdf.csv", {"tag", "x", "ccdf"}, files);
        if (!graph().edges().empty()) {
          for (bool by_tag : {false, true})
            for (const auto& series : weight_ccdf(graph(), by_tag))
              for (const auto& p : series.points)
                f.row({tag_name(series.tag), format_number(p.x), format_number(p.ccdf)});
        }
        break;
      }
      case Stage::backbone: {
        const auto b = disparity_backbone(graph(), options_.alpha);
        CsvFile f(dir, "backbone.csv", {"u", "v", "weight", "tag"}, files);
        for (const auto& e : b.edges()) f.row({b.name(e.u), b.name(e.v), num(e.weight), tag_name(e.tag)});
        std::vector<char> used(b.vertices().size(), 0);
        for (const auto& e : b.edges()) used[e.u] = used[e.v] = 1;
        CsvFile nodes(dir, "backbone_nodes.csv", {"user_id", "label"}, files);
        for (std::uint32_t i = 0; i < b.vertices().size(); ++i)
          if (used[i]) nodes.row({b.name(i), label_name(polarization().label_of(b.name(i)))});
        break;
      }
      case Stage::vocab: {
        const auto summaries = vocabulary_ccdf(bows(), polarization());
        {
          CsvFile f(dir, "vocab_ccdf.csv", {"community", "x", "ccdf"}, files);
          for (const auto& s : summaries)
            for (const auto& p : s.ccdf) f.row({label_name(s.community), format_number(p.x), format_number(p.ccdf)});
        }
        CsvFile f(dir, "vocab_summary.csv", {"community", "users", "median", "mean"}, files);
        for (const auto& s : summaries)
          f.row({label_name(s.community), num(s.users), format_number(s.median), format_number(s.mean)});
        break;
      }
      case Stage::lex: {
        for (auto level : {FrequencyLevel::collective, FrequencyLevel::individual}) {
          const auto chart = frequency_chart(corpus(), tokens(), polarization(), level);
          const std::string name =
              level == FrequencyLevel::collective ? "chart_collective.csv" : "chart_individual.csv";
          CsvFile f(dir, name, {"term", "freq_science", "freq_conspiracy", "diff"}, files);
          for (const auto& r : chart.rows)
            f.row({r.term, format_number(r.freq_science), format_number(r.freq_conspiracy), format_number(r.diff)});
          if (level == FrequencyLevel::collective) {
            const auto ex = exclusive_words(chart);
            CsvFile e(dir, "exclusive.csv", {"community", "term", "freq"}, files);
            for (const auto& [t, fr] : ex.science) e.row({"science", t, format_number(fr)});
            for (const auto& [t, fr] : ex.conspiracy) e.row({"conspiracy", t, format_number(fr)});
          }
        }
        break;
      }
      case Stage::converge: {
        const auto& s = static_result();
        {
          CsvFile f(dir, "static.csv", {"tag", "level", "mean_ell", "pairs"}, files);
          for (const auto& p : s.series)
            f.row({std::string(to_string(p.tag)), num(p.level), format_number(p.mean_ell), num(p.pairs)});
        }
        {
          CsvFile f(dir, "fit.csv", {"tag", "beta0", "beta1", "se0", "se1", "r2", "p"}, files);
          for (const auto& t : s.fits) {
            std::vector<std::string> row{std::string(to_string(t.tag))};
            for (auto& x : fit_fields(t.fit)) row.push_back(std::move(x));
            f.row(row);
          }
        }
        {
          CsvFile f(dir, "pairs.csv", {"u", "v", "tag", "level", "ell", "fraction_u", "fraction_v"}, files);
          for (const auto& r : s.records)
            f.row({r.u, r.v, std::string(to_string(r.tag)), num(r.interaction_level), format_number(r.ell),
                   format_number(r.co_comment_fraction_u), format_number(r.co_comment_fraction_v)});
        }
        const auto fr = co_comment_fractions(graph(), corpus(), options_.threads);
        CsvFile f(dir, "co_comment.csv", {"tag", "level", "pairs", "mean_min", "mean_max", "mean_fraction"}, files);
        for (const auto& p : fr.series)
          f.row({std::string(to_string(p.tag)), num(p.level), num(p.pairs), format_number(p.mean_min),
                 format_number(p.mean_max), format_number(p.mean_fraction)});
        break;
      }
      case Stage::temporal: {
        TemporalConfig cfg;
        cfg.min_weight = options_.temporal_min_weight;
        const auto t = temporal_analysis(graph(), corpus(), tokens(), cfg, options_.threads);
        {
          CsvFile f(dir, "temporal.csv", {"tag", "tau", "mean_h", "pairs", "mean_r_s", "rs_pairs"}, files);
          for (const auto& p : t.series)
            f.row({std::string(to_string(p.tag)), num(p.tau), format_number(p.mean_h), num(p.pairs),
                   format_number(p.mean_r_s), num(p.rs_pairs)});
        }
        {
          CsvFile f(dir, "temporal_fit.csv",
                    {"tag", "pairs", "mean_h", "se_h", "mean_r_s", "rs_pairs", "constant_pairs", "beta0", "beta1",
                     "se0", "se1", "r2", "p"},
                    files);
          for (const auto& s : t.summaries) {
            std::vector<std::string> row{std::string(to_string(s.tag)), num(s.pairs), format_number(s.mean_h),
                                         format_number(s.se_h),          format_number(s.mean_r_s),
                                         num(s.rs_pairs),                num(s.constant_pairs)};
            for (auto& x : fit_fields(s.fit)) row.push_back(std::move(x));
            f.row(row);
          }
        }
        {
          CsvFile f(dir, "temporal_pairs.csv", {"u", "v", "tag", "level", "t_first", "tau", "h", "r_s", "p"}, files);
          for (const auto& r : t.records)
            f.row({r.u, r.v, std::string(to_string(r.tag)), num(r.interaction_level), num(r.t_first), num(r.tau),
                   format_number(r.h), r.spearman ? format_number(r.spearman->r_s) : "",
                   r.spearman ? format_number(r.spearman->p) : ""});
        }
        CsvFile f(dir, "temporal_series.csv", {"u", "v", "t", "ell"}, files);
        for (const auto& r : t.records)
          for (std::size_t k = 0; k < r.series.size(); ++k)
            f.row({r.u, r.v, num(r.t_first + static_cast<std::int64_t>(k)), format_number(r.series[k])});
        break;
      }
      case Stage::permtest: {
        const auto results =
            permutation_test(static_result(), bows(), options_.permutations, options_.seed, options_.threads);
        ordered_json j;
        j["n"] = options_.permutations;
        j["seed"] = options_.seed;
        j["statistic"] = "beta1";
        ordered_json tags = ordered_json::array();
        for (const auto& r : results)
          tags.push_back({{"tag", to_string(r.tag)},
                          {"users", r.users},
                          {"pairs", r.pairs},
                          {"observed", r.observed},
                          {"p", r.p}});
        j["tags"] = std::move(tags);
        write_text(dir, "permtest.json", j.dump(2) + "\n", files);
        break;
      }
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
  return result;
}

std::string manifest_json(const Pipeline& pipeline, const fs::path& dir, const std::vector<StageFiles>& stages) {
  const auto& o = pipeline.options();
  ordered_json options;
  options["format"] = o.format ? (*o.format == CorpusFormat::jsonl ? "jsonl" : "csv") : "auto";
  options["threshold"] = format_number(o.threshold);
  options["min_weight"] = o.min_weight;
  options["temporal_min_weight"] = o.temporal_min_weight;
  options["alpha"] = format_number(o.alpha);
  options["bins"] = o.bins;
  options["n"] = o.permutations;
  options["seed"] = o.seed;
  options["stopwords"] = o.stopwords ? o.stopwords->generic_string() : std::string("default");
  options["lemmas"] = o.lemmas ? o.lemmas->generic_string() : std::string("identity");

  ordered_json j;
  j["tool"] = "echolex";
  j["version"] = ECHOLEX_VERSION;
  j["input"] = {{"path", pipeline.input().generic_string()}, {"sha256", input_hash(pipeline.input())}};
  j["options"] = options;
  j["hashes"] = {
      {"stopwords", o.stopwords ? sha256_file(*o.stopwords) : sha256_hex(detail::kDefaultStopwordsText)},
      {"lemmas", o.lemmas ? sha256_file(*o.lemmas) : sha256_hex("identity")},
      {"options", sha256_hex(options.dump())},
  };
  ordered_json list = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json files = ordered_json::array();
    for (const auto& f : s.files) files.push_back({{"path", f}, {"sha256", sha256_file(dir / f)}});
    list.push_back({{"stage", to_string(s.stage)}, {"files", std::move(files)}});
  }
  j["stages"] = std::move(list);
  return j.dump(2) + "\n";
}

std::vector<StageFiles> run_report(const fs::path& input, const fs::path& dir, const PipelineOptions& options) {
  Pipeline pipeline(input, options);
  std::vector<StageFiles> stages;
  for (auto s : kAllStages) stages.push_back(pipeline.write_stage(s, dir));
  std::vector<std::string> written;
  write_text(dir, "manifest.json", manifest_json(pipeline, dir, stages), written);
  return stages;
}

}  // namespace echolex
