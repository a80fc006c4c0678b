#include <doctest.h>

#include <json.hpp>

#include "echolex/synthgen.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = ECHOLEX_CLI_PATH;

std::pair<int, std::string> cli(const std::string& args) { return testing::run("'" + kCli + "' " + args); }

// A small synthetic corpus written once through `echolex synth`.
const fs::path& corpus_dir() {
  static const fs::path dir = [] {
    const auto d = testing::temp_dir("cli_corpus");
    testing::spit(d / "synth.json", R"({"users_science": 120, "users_conspiracy": 120, "pages_science": 3,
      "pages_conspiracy": 3, "posts_per_page": 25, "pairs_per_community": 70, "cross_pairs": 20,
      "common_vocab": 1200, "exclusive_vocab_science": 8, "exclusive_vocab_conspiracy": 8})");
    const auto [code, out] = cli("synth --config '" + (d / "synth.json").string() + "' --out '" +
                                 (d / "corpus.jsonl").string() + "' --truth '" + (d / "truth.json").string() + "'");
    REQUIRE_MESSAGE(code == 0, out);
    return d;
  }();
  return dir;
}

std::string corpus() { return "'" + (corpus_dir() / "corpus.jsonl").string() + "'"; }

}  // namespace

TEST_CASE("selftest runs the oracle suite") {
  const auto [code, out] = cli("selftest");
  CHECK(code == 0);
  CHECK(out.find("selftest passed") != std::string::npos);
  CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("synth writes the corpus and its ground truth") {
  const auto truth = nlohmann::json::parse(testing::slurp(corpus_dir() / "truth.json"));
  CHECK(truth["users"].size() == 240);
  CHECK(fs::file_size(corpus_dir() / "corpus.jsonl") > 0);

  const auto dir = testing::temp_dir("cli_synth_csv");
  const auto [code, out] = cli("synth --config '" + (corpus_dir() / "synth.json").string() + "' --format csv --out '" +
                               (dir / "c").string() + "' --seed 4");
  CHECK(code == 0);
  CHECK(fs::exists(dir / "c" / "comments.csv"));
}

TEST_CASE("report bundles every stage with a complete manifest") {
  const auto out = testing::temp_dir("cli_report");
  const auto [code, text] = cli("report " + corpus() + " --out '" + out.string() + "' --n 30 --seed 7");
  REQUIRE_MESSAGE(code == 0, text);
  const auto manifest = nlohmann::json::parse(testing::slurp(out / "manifest.json"));
  CHECK(manifest["stages"].size() == 10);
  CHECK(manifest["options"]["n"] == 30);
  std::size_t listed = 0;
  for (const auto& stage : manifest["stages"])
    for (const auto& f : stage["files"]) {
      CHECK(fs::exists(out / std::string(f["path"])));
      ++listed;
    }
  std::size_t on_disk = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(out)) ++on_disk;
  CHECK(listed + 1 == on_disk);
}

TEST_CASE("single stages write their own files") {
  const std::vector<std::pair<std::string, std::string>> stages{
      {"ingest", "breakdown.csv"},  {"polarize", "polarization.csv"}, {"graph", "edges.csv"},
      {"backbone", "backbone.csv"}, {"ccdf", "ccdf.csv"},             {"lex", "exclusive.csv"},
      {"vocab", "vocab_ccdf.csv"},  {"converge", "static.csv"},       {"temporal", "temporal.csv"},
      {"permtest", "permtest.json"}};
  for (const auto& [stage, file] : stages) {
    INFO(stage);
    const auto out = testing::temp_dir("cli_stage_" + stage);
    const auto [code, text] = cli(stage + " " + corpus() + " --out '" + out.string() + "' --n 20");
    CHECK(code == 0);
    CHECK(fs::exists(out / file));
    CHECK(text.find(file) != std::string::npos);
  }
}

TEST_CASE("the temporal min-weight flag filters pairs") {
  const auto loose = testing::temp_dir("cli_temporal_loose");
  const auto strict = testing::temp_dir("cli_temporal_strict");
  REQUIRE(cli("temporal " + corpus() + " --out '" + loose.string() + "' --min-weight 4").first == 0);
  REQUIRE(cli("temporal " + corpus() + " --out '" + strict.string() + "' --min-weight 12").first == 0);
  const auto rows = [](const fs::path& p) {
    const auto text = testing::slurp(p / "temporal_pairs.csv");
    return std::count(text.begin(), text.end(), '\n');
  };
  CHECK(rows(loose) > rows(strict));
}

TEST_CASE("identical invocations give identical outputs whatever the thread count") {
  std::string reference;
  for (const char* threads : {"1", "4", "8"}) {
    const auto out = testing::temp_dir(std::string("cli_threads_") + threads);
    REQUIRE(cli("report " + corpus() + " --out '" + out.string() + "' --n 20 --threads " + threads).first == 0);
    const auto manifest = testing::slurp(out / "manifest.json");
    if (reference.empty()) reference = manifest;
    CHECK(manifest == reference);
  }
}

TEST_CASE("errors exit nonzero with a diagnostic") {
  SUBCASE("missing input names the path") {
    const auto out = testing::temp_dir("cli_missing");
    const auto [code, text] = cli("polarize /nonexistent/missing.jsonl --out '" + out.string() + "'");
    CHECK(code != 0);
    CHECK(text.find("missing.jsonl") != std::string::npos);
    CHECK(text.find("polarize") != std::string::npos);
  }
  SUBCASE("unknown flag") { CHECK(cli("graph " + corpus() + " --bogus").first != 0); }
  SUBCASE("unknown subcommand") { CHECK(cli("frobnicate").first != 0); }
  SUBCASE("threshold out of range") { CHECK(cli("polarize " + corpus() + " --threshold 2").first != 0); }
  SUBCASE("malformed corpus") {
    const auto dir = testing::temp_dir("cli_malformed");
    testing::spit(dir / "bad.jsonl", "{\"kind\":\"page\",\"id\":\"a\",\"category\":\"science\"}\nnot json\n");
    const auto [code, text] = cli("ingest '" + (dir / "bad.jsonl").string() + "' --out '" + dir.string() + "'");
    CHECK(code != 0);
    CHECK(text.find("bad.jsonl:2") != std::string::npos);
  }
  SUBCASE("bad generator config") {
    const auto dir = testing::temp_dir("cli_bad_config");
    testing::spit(dir / "c.json", R"({"unknown_field": 1})");
    const auto [code, text] = cli("synth --config '" + (dir / "c.json").string() + "' --out '" +
                                  (dir / "x.jsonl").string() + "'");
    CHECK(code != 0);
    CHECK(text.find("unknown_field") != std::string::npos);
  }
}

TEST_CASE("version and logging") {
  const auto [code, text] = cli("--version");
  CHECK(code == 0);
  CHECK(text.find('.') != std::string::npos);
  const auto out = testing::temp_dir("cli_logging");
  const auto [c2, t2] = testing::run("ECHOLEX_LOG=info '" + kCli + "' ingest " + corpus() + " --out '" + out.string() + "'");
  CHECK(c2 == 0);
  CHECK(t2.find("[info]") != std::string::npos);
}
