// Command-line front end: one subcommand per pipeline stage, plus synth,
// report and selftest.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "echolex/corpus_io.hpp"
#include "echolex/pipeline.hpp"
#include "echolex/synthgen.hpp"
#include "oracles.hpp"

namespace {

using namespace echolex;

void configure_logging() {
  auto logger = spdlog::stderr_color_st("echolex");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("ECHOLEX_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

struct Flags {
  std::string input;
  std::string out = ".";
  std::string format;
  std::string stopwords, lemmas;
  PipelineOptions options;
};

// Registers the flags shared by the analysis subcommands.
void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("input", f.input, "Corpus: a .jsonl file or a directory of CSV files")->required();
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--format", f.format, "Corpus format: jsonl or csv (default: by path)");
  cmd->add_option("--threshold", f.options.threshold, "Polarization threshold on |sigma|")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-weight", f.options.min_weight, "Minimum interaction level of analysed edges")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", f.options.alpha, "Disparity-filter significance level")->capture_default_str();
  cmd->add_option("--bins", f.options.bins, "Polarization histogram bins")->capture_default_str();
  cmd->add_option("--stopwords", f.stopwords, "Stopword list (default: shipped list)")->check(CLI::ExistingFile);
  cmd->add_option("--lemmas", f.lemmas, "Lemma map, token<TAB>lemma per line")->check(CLI::ExistingFile);
  cmd->add_option("--n", f.options.permutations, "Permutation pseudosamples")->capture_default_str();
  cmd->add_option("--seed", f.options.seed, "Permutation seed")->capture_default_str();
  cmd->add_option("--threads", f.options.threads, "Worker threads")->capture_default_str();
}

PipelineOptions finish(Flags& f) {
  PipelineOptions o = f.options;
  if (!f.format.empty()) {
    o.format = parse_corpus_format(f.format);
    if (!o.format) throw InvalidArgument("unknown corpus format '" + f.format + "'");
  }
  if (!f.stopwords.empty()) o.stopwords = f.stopwords;
  if (!f.lemmas.empty()) o.lemmas = f.lemmas;
  return o;
}

int run_stage(Stage stage, Flags& f) {
  Pipeline pipeline(f.input, finish(f));
  spdlog::info("{}: reading {}", to_string(stage), f.input);
  const auto written = pipeline.write_stage(stage, f.out);
  for (const auto& file : written.files) fmt::print("{}\n", (std::filesystem::path(f.out) / file).string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"echolex: polarization, interaction networks and lexical convergence of comment corpora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ECHOLEX_VERSION));

  const std::pair<Stage, const char*> stages[] = {
      {Stage::ingest, "Validate a corpus and write the breakdown table"},
      {Stage::polarize, "Per-user polarization, its histogram and comment fractions"},
      {Stage::graph, "Interaction network of polarized users (edges.csv)"},
      {Stage::backbone, "Disparity-filter backbone of the interaction network"},
      {Stage::ccdf, "CCDF of interaction levels, overall and per interaction type"},
      {Stage::lex, "Word-frequency charts and exclusive words"},
      {Stage::vocab, "Vocabulary-size CCDF per community"},
      {Stage::converge, "Static lexical convergence versus interaction level"},
      {Stage::temporal, "Lexical convergence along each pair's interactions"},
      {Stage::permtest, "Permutation test of the static convergence slope"},
  };
  std::map<CLI::App*, Stage> stage_of;
  Flags flags;
  for (const auto& [stage, help] : stages) {
    auto* cmd = app.add_subcommand(std::string(to_string(stage)), help);
    add_common(cmd, flags);
    stage_of[cmd] = stage;
  }
  // The temporal stage reads its own default for --min-weight.
  app.get_subcommand("temporal")->get_option("--min-weight")->description(
      "Minimum interaction level of analysed pairs (default 8)");

  auto* report = app.add_subcommand("report", "Run every stage into one directory with a manifest");
  add_common(report, flags);
  report->add_option("--temporal-min-weight", flags.options.temporal_min_weight,
                     "Minimum interaction level for the temporal stage")
      ->capture_default_str();

  std::string synth_config, synth_out = "corpus.jsonl", synth_truth, synth_format;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted ground truth");
  synth->add_option("--config", synth_config, "Generator config (JSON); defaults when omitted")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Corpus output path")->capture_default_str();
  synth->add_option("--truth", synth_truth, "Ground-truth JSON output path");
  synth->add_option("--format", synth_format, "jsonl or csv (default: jsonl)");
  std::uint64_t synth_seed = 0;
  auto* seed_opt = synth->add_option("--seed", synth_seed, "Override the config seed");

  std::uint64_t selftest_seed = 20140101;
  auto* selftest = app.add_subcommand("selftest", "Compare the statistics kernels with brute-force oracles");
  selftest->add_option("--seed", selftest_seed, "Seed of the random cases")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& [cmd, stage] : stage_of) {
      if (!cmd->parsed()) continue;
      if (stage == Stage::temporal) {
        const bool given = cmd->get_option("--min-weight")->count() > 0;
        flags.options.temporal_min_weight = given ? flags.options.min_weight : 8;
        // The analysis graph keeps the default cutoff; the pair filter applies on top.
        flags.options.min_weight = std::min<std::int64_t>(3, flags.options.temporal_min_weight);
      }
      return run_stage(stage, flags);
    }
    if (report->parsed()) {
      const auto stages_written = run_report(flags.input, flags.out, finish(flags));
      std::size_t files = 0;
      for (const auto& s : stages_written) files += s.files.size();
      fmt::print("{}: {} files and manifest.json\n", flags.out, files);
      return 0;
    }
    if (synth->parsed()) {
      GeneratorConfig config = synth_config.empty() ? GeneratorConfig{} : load_generator_config(synth_config);
      if (seed_opt->count()) config.seed = synth_seed;
      const auto result = generate(config);
      CorpusFormat format = CorpusFormat::jsonl;
      if (!synth_format.empty()) {
        auto parsed = parse_corpus_format(synth_format);
        if (!parsed) throw InvalidArgument("unknown corpus format '" + synth_format + "'");
        format = *parsed;
      }
      save_corpus(result.corpus, synth_out, format);
      if (!synth_truth.empty()) {
        std::ofstream out(synth_truth, std::ios::binary);
        if (!out) throw Error("cannot write '" + synth_truth + "'");
        out << to_json(result.truth);
      }
      fmt::print("{}: {} users, {} comments, {} likes, {} planted pairs\n", synth_out, result.truth.users.size(),
                 result.corpus.comments().size(), result.corpus.likes().size(), result.truth.pairs.size());
      return 0;
    }
    if (selftest->parsed()) {
      bool ok = true;
      for (const auto& r : oracles::run_suite(selftest_seed, &std::cout)) ok = ok && r.failures == 0;
      fmt::print("selftest {}\n", ok ? "passed" : "FAILED");
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "echolex: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
