#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <map>
#include <set>

#include "echolex/csv.hpp"
#include "echolex/pipeline.hpp"
#include "echolex/synthgen.hpp"
#include "support.hpp"

using namespace echolex;
namespace fs = std::filesystem;

namespace {

fs::path synthetic_input() {
  static const fs::path path = [] {
    GeneratorConfig c;
    c.users_science = 150;
    c.users_conspiracy = 150;
    c.pages_science = 4;
    c.pages_conspiracy = 4;
    c.posts_per_page = 20;
    c.pairs_per_community = 90;
    c.cross_pairs = 25;
    c.common_vocab = 1500;
    c.exclusive_vocab_science = 10;
    c.exclusive_vocab_conspiracy = 10;
    const auto p = testing::temp_dir("pipeline_input") / "corpus.jsonl";
    save_corpus(generate(c).corpus, p, CorpusFormat::jsonl);
    return p;
  }();
  return path;
}

PipelineOptions quick() {
  PipelineOptions o;
  o.permutations = 50;
  return o;
}

std::map<std::string, std::string> directory(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = testing::slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("number formatting and hashing") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-7) == "-2.5e-07");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  for (double x : {0.1 + 0.2, 1.0 / 3, 6.02214076e23, -1e-300}) CHECK(std::stod(format_number(x)) == x);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("a report lists every file it writes with its hash") {
  const auto dir = testing::temp_dir("pipeline_report");
  const auto stages = run_report(synthetic_input(), dir, quick());
  REQUIRE(stages.size() == std::size(kAllStages));

  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "manifest.json"));
  CHECK(manifest["tool"] == "echolex");
  CHECK(manifest["input"]["sha256"] == sha256_file(synthetic_input()));
  std::set<std::string> listed;
  for (const auto& stage : manifest["stages"])
    for (const auto& f : stage["files"]) {
      const std::string path = f["path"];
      listed.insert(path);
      CHECK(f["sha256"] == sha256_file(dir / path));
    }
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") on_disk.insert(e.path().filename().string());
  CHECK(listed == on_disk);
  for (const char* expected : {"breakdown.csv", "polarization.csv", "polarization_pdf.csv", "edges.csv",
                               "backbone.csv", "ccdf.csv", "vocab_ccdf.csv", "chart_collective.csv", "static.csv",
                               "fit.csv", "temporal.csv", "temporal_fit.csv", "permtest.json"})
    CHECK(listed.count(expected));

  // Every CSV has a header and reads back through the library's own loader.
  for (const auto& name : on_disk) {
    if (fs::path(name).extension() != ".csv") continue;
    INFO(name);
    const auto table = csv::read_file((dir / name).string());
    CHECK(!table.header.empty());
    for (const auto& row : table.rows) CHECK(row.size() == table.header.size());
  }
}

TEST_CASE("outputs do not depend on the thread count") {
  std::map<std::string, std::string> reference;
  for (unsigned threads : {1u, 4u, 8u}) {
    auto o = quick();
    o.threads = threads;
    const auto dir = testing::temp_dir("pipeline_threads_" + std::to_string(threads));
    run_report(synthetic_input(), dir, o);
    const auto files = directory(dir);
    if (reference.empty()) reference = files;
    else
      for (const auto& [name, text] : reference) {
        INFO(name);
        CHECK(files.at(name) == text);
      }
  }
}

TEST_CASE("stages can be written in any order with identical results") {
  const auto a = testing::temp_dir("pipeline_order_a");
  const auto b = testing::temp_dir("pipeline_order_b");
  {
    Pipeline p(synthetic_input(), quick());
    for (auto s : kAllStages) p.write_stage(s, a);
  }
  {
    Pipeline p(synthetic_input(), quick());
    for (auto it = std::rbegin(kAllStages); it != std::rend(kAllStages); ++it) p.write_stage(*it, b);
  }
  CHECK(directory(a) == directory(b));
}

TEST_CASE("the csv corpus layout gives the same report as jsonl") {
  const auto csv_dir = testing::temp_dir("pipeline_csv_input");
  save_corpus(load_corpus(synthetic_input()), csv_dir, CorpusFormat::csv_trio);
  const auto a = testing::temp_dir("pipeline_from_jsonl");
  const auto b = testing::temp_dir("pipeline_from_csv");
  run_report(synthetic_input(), a, quick());
  run_report(csv_dir, b, quick());
  auto fa = directory(a), fb = directory(b);
  fa.erase("manifest.json");
  fb.erase("manifest.json");
  CHECK(fa == fb);
}

TEST_CASE("errors carry the stage name") {
  const auto out = testing::temp_dir("pipeline_errors");
  Pipeline missing("/nonexistent/corpus.jsonl", quick());
  try {
    missing.write_stage(Stage::polarize, out);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::polarize);
    CHECK(std::string(e.what()).rfind("polarize: ", 0) == 0);
    CHECK(std::string(e.what()).find("/nonexistent/corpus.jsonl") != std::string::npos);
  }

  // A corpus without interactions gives a header-only CCDF rather than an error.
  const auto lonely = testing::temp_dir("pipeline_lonely") / "c.jsonl";
  save_corpus(testing::CorpusBuilder().page("pg", Category::science).post("p", "pg").comment("p", "a", "ciao").build(),
              lonely, CorpusFormat::jsonl);
  Pipeline p(lonely, quick());
  CHECK_NOTHROW(p.write_stage(Stage::ccdf, out));
  CHECK(csv::read_file((out / "ccdf.csv").string()).rows.empty());

  auto o = quick();
  o.stopwords = "/nonexistent/stopwords.txt";
  Pipeline q(lonely, o);
  CHECK_NOTHROW(q.write_stage(Stage::ingest, out));
  try {
    q.write_stage(Stage::vocab, out);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::vocab);
    CHECK(std::string(e.what()).find("stopwords.txt") != std::string::npos);
  }
}

TEST_CASE("custom stopwords and lemmas are hashed into the manifest") {
  const auto dir = testing::temp_dir("pipeline_text_config");
  testing::spit(dir / "stop.txt", "il\n");
  testing::spit(dir / "lemmas.tsv", "gatti\tgatto\n");
  auto o = quick();
  o.stopwords = dir / "stop.txt";
  o.lemmas = dir / "lemmas.tsv";
  const auto out = dir / "report";
  run_report(synthetic_input(), out, o);
  const auto manifest = nlohmann::json::parse(testing::slurp(out / "manifest.json"));
  CHECK(manifest["hashes"]["stopwords"] == sha256_file(dir / "stop.txt"));
  CHECK(manifest["hashes"]["lemmas"] == sha256_file(dir / "lemmas.tsv"));
}
