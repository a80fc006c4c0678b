#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "echolex/convergence.hpp"
#include "echolex/corpus.hpp"
#include "echolex/corpus_io.hpp"
#include "echolex/error.hpp"
#include "echolex/graph.hpp"
#include "echolex/lexicon.hpp"
#include "echolex/polarization.hpp"

namespace echolex {

/// Flags shared by every pipeline stage.
struct PipelineOptions {
  std::optional<CorpusFormat> format;  ///< detected from the path when empty
  double threshold = kDefaultPolarizationThreshold;
  std::int64_t min_weight = 3;           ///< interaction network and static analysis
  std::int64_t temporal_min_weight = 8;  ///< temporal analysis
  double alpha = 0.05;                   ///< disparity filter
  std::size_t bins = 40;                 ///< polarization histogram
  std::optional<std::filesystem::path> stopwords;  ///< shipped list when empty
  std::optional<std::filesystem::path> lemmas;     ///< identity when empty
  std::size_t permutations = 1000;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

enum class Stage { ingest, polarize, graph, ccdf, backbone, vocab, lex, converge, temporal, permtest };

inline constexpr Stage kAllStages[] = {Stage::ingest, Stage::polarize, Stage::graph,    Stage::ccdf,
                                       Stage::backbone, Stage::vocab,  Stage::lex,      Stage::converge,
                                       Stage::temporal, Stage::permtest};

std::string_view to_string(Stage s);

/// An inner-module error annotated with the stage that raised it.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// Files written by one stage, as names relative to the output directory.
struct StageFiles {
  Stage stage = Stage::ingest;
  std::vector<std::string> files;
};

/// Loads a corpus once and computes each intermediate result on first use,
/// so stages can be written in any order without recomputation.
class Pipeline {
 public:
  Pipeline(std::filesystem::path input, PipelineOptions options);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const PipelineOptions& options() const { return options_; }
  const std::filesystem::path& input() const { return input_; }

  const Corpus& corpus();
  const PolarizationTable& polarization();
  const InteractionGraph& full_graph();
  const InteractionGraph& graph();  ///< polarized users, weight >= min_weight
  const PipelineConfig& text_config();
  const TokenizedCorpus& tokens();
  const UserBows& bows();
  const StaticAnalysis& static_result();

  /// Writes the files of one stage into `dir` (created if needed). Errors
  /// from inner modules are rethrown as StageError.
  StageFiles write_stage(Stage stage, const std::filesystem::path& dir);

 private:
  struct Cache;
  std::filesystem::path input_;
  PipelineOptions options_;
  std::unique_ptr<Cache> cache_;
};

/// Runs every stage into `dir` and writes manifest.json listing each file
/// with its SHA-256. Returns the stage listing.
std::vector<StageFiles> run_report(const std::filesystem::path& input, const std::filesystem::path& dir,
                                   const PipelineOptions& options);

/// Manifest text for a finished run (no timestamps, so identical runs match).
std::string manifest_json(const Pipeline& pipeline, const std::filesystem::path& dir,
                          const std::vector<StageFiles>& stages);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double x);

}  // namespace echolex
