#include <sstream>

#include "doctest.h"
#include "emailad/error.hpp"
#include "emailad/pipeline.hpp"
#include "emailad/synth.hpp"
#include "emailad/util.hpp"
#include "support.hpp"

using namespace emailad;
using nlohmann::json;
using testing::TempDir;

namespace {

// Small corpus and small grids: the whole four-phase run takes seconds.
json small_config() {
  return json::parse(R"({
    "dataset": {"trec_index": "trec/full/index", "trec_root": "trec/full", "phishing_dir": "phishing"},
    "features": {"k": 50},
    "selection": {"importance_repeats": 3, "top_m": 30, "models": ["RF", "LR"]},
    "evaluation": {"cv_folds": 3, "test_fraction": 0.2},
    "binary_algorithms": ["LR", "RF", "kNN"],
    "grids": {
      "RF": {"n_trees": [15], "max_depth": ["inf"]},
      "kNN": {"k": [3]},
      "LR": {"lambda": [1e-3]},
      "OC-SVM": {"nu": [0.1], "gamma": ["1/d"]}
    },
    "stacks": [["RF", "kNN"]],
    "seed": 7
  })");
}

SynthLayout small_corpus(const std::filesystem::path& dir) {
  SynthOptions o;
  o.ham = 160;
  o.spam = 160;
  o.phishing = 80;
  o.messages_per_mbox = 30;
  return write_synthetic_corpus(dir, o);
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config parsing") {
    auto c = config_from_json(small_config(), "/base");
    CHECK(c.trec_index == "/base/trec/full/index");
    CHECK(c.phishing_dir == "/base/phishing");
    CHECK(c.cv_folds == 3);
    CHECK(c.seed == 7);
    CHECK(c.stacks.size() == 1);
    CHECK(c.binary_algorithms.size() == 3);

    auto bad = small_config();
    bad["evaluation"]["folds"] = 3;
    CHECK_THROWS_AS(config_from_json(bad, "/"), InvalidArgument);
    auto top = small_config();
    top["colour"] = "blue";
    CHECK_THROWS_AS(config_from_json(top, "/"), InvalidArgument);
    auto lonely = small_config();
    lonely["stacks"] = json::parse(R"([["RF"]])");
    CHECK_THROWS_AS(config_from_json(lonely, "/"), InvalidArgument);

    auto d = default_config();
    CHECK(d.k == 50);
    CHECK(d.top_m == 30);
    CHECK(d.cv_folds == 10);
    CHECK(d.seed == 42);
    CHECK(d.stacks.size() == 4);
    CHECK(config_from_json(config_to_json(d), "/") .k == d.k);
  }

  TEST_CASE("grid tokens") {
    auto g = resolve_grid({{"max_depth", {"inf", "20"}}, {"gamma", {"1/d", "0.5"}}}, 8);
    CHECK(g.at("max_depth") == std::vector<double>{0, 20});
    CHECK(g.at("gamma") == std::vector<double>{0.125, 0.5});
    CHECK_THROWS_AS(resolve_grid({{"C", {"big"}}}, 8), InvalidArgument);
  }

  TEST_CASE("default grids") {
    auto d = default_config();
    auto rf = resolve_grid(d.grids.at(Algorithm::RandomForest), 10);
    CHECK(rf.at("n_trees") == std::vector<double>{100});
    CHECK(rf.at("max_depth") == std::vector<double>{0, 20});
    CHECK(resolve_grid(d.grids.at(Algorithm::KNN), 10).at("k") == std::vector<double>{1, 3, 5, 7});
    CHECK(resolve_grid(d.grids.at(Algorithm::LinearSVM), 10).at("C") == std::vector<double>{0.1, 1, 10});
    CHECK(resolve_grid(d.grids.at(Algorithm::OneClassSVM), 10).at("gamma") == std::vector<double>{0.1, 0.5, 0.1});
  }

  TEST_CASE("four phases: tables, bundles, manifest and determinism") {
    TempDir dir("pipe");
    small_corpus(dir.path());
    auto cfg = config_from_json(small_config(), dir.path());
    cfg.output_dir = dir / "out";
    std::vector<int> phases = {1, 2, 3, 4};
    std::ostringstream log;
    auto first = run_pipeline(cfg, phases, &log);
    REQUIRE(first.phases.size() == 4);

    std::size_t tables = 0;
    for (const auto& p : first.phases) tables += p.tables.size();
    CHECK(tables == 6);
    for (const char* f : {"phase1_binary.txt", "phase1_stacking.csv", "phase2_binary.csv", "phase3_oneclass.txt",
                          "phase4_oneclass.csv", "phase1.model.json", "phase4.model.json", "phase1_roc.csv",
                          "phase1_importance.csv", "manifest.json"})
      CHECK_MESSAGE(std::filesystem::exists(cfg.output_dir / f), f);

    const auto& m = first.manifest;
    CHECK(m.at("tool") == "emailad");
    CHECK(m.at("version") == kToolVersion);
    CHECK(m.at("datasets").at("A").at("count") == 320);
    CHECK(m.at("datasets").at("B").at("count") == 80);
    CHECK(m.at("phases").size() == 4);
    CHECK(m.at("manifest_digest") == hex64(manifest_digest(m)));

    CHECK(first.phases[1].schema.feature_set == FeatureSet::DomainMatchOnly);
    CHECK(first.phases[3].schema.feature_set == FeatureSet::DomainMatchOnly);
    CHECK(first.phases[2].bundle.model.one_class());
    CHECK(first.phases[0].positive_label == "spam");
    CHECK(first.phases[1].positive_label == "phishing");
    CHECK(first.phases[0].selected_features.size() <= 30);
    for (const auto& p : first.phases) {
      // Balanced held-out sets.
      const auto& r = p.models.front().heldout;
      CHECK(r.tp + r.fn == r.tn + r.fp);
    }

    // Same output directory (it is part of the digest), first run moved aside.
    std::filesystem::rename(dir / "out", dir / "run1");
    set_num_threads(1);
    auto second = run_pipeline(cfg, phases, nullptr);
    set_num_threads(0);
    std::filesystem::rename(dir / "out", dir / "run2");
    CHECK(second.manifest.at("manifest_digest") == first.manifest.at("manifest_digest"));
    for (const char* f : {"phase1.model.json", "phase2.model.json", "phase3.model.json", "phase4.model.json",
                          "phase1_binary.csv", "phase3_oneclass.csv"})
      CHECK_MESSAGE(testing::read_file(dir / "run1" / f) == testing::read_file(dir / "run2" / f), f);
    auto a = json::parse(testing::read_file(dir / "run1/manifest.json"));
    auto b = json::parse(testing::read_file(dir / "run2/manifest.json"));
    a.erase("timestamp");
    b.erase("timestamp");
    CHECK(a == b);
  }

  TEST_CASE("single phase writes one model file") {
    TempDir dir("one");
    small_corpus(dir.path());
    auto cfg = config_from_json(small_config(), dir.path());
    cfg.output_dir = dir / "out";
    std::vector<int> phases = {3};
    auto r = run_pipeline(cfg, phases, nullptr);
    std::size_t models = 0;
    for (const auto& e : std::filesystem::directory_iterator(cfg.output_dir))
      models += e.path().string().ends_with(".model.json");
    CHECK(models == 1);
    CHECK(r.phases.at(0).tables.size() == 1);
  }

  TEST_CASE("missing datasets fail loudly") {
    TempDir dir("nodata");
    auto cfg = config_from_json(small_config(), dir.path());
    CHECK_THROWS_AS(load_datasets(cfg, nullptr), IoError);
  }

  TEST_CASE("header cache is deterministic") {
    std::vector<CorpusRecord> recs;
    for (int i = 0; i < 4; ++i)
      recs.push_back({"m" + std::to_string(i), parse_headers(synth_email(Label::Ham, 60 + i)), Label::Ham});
    std::vector<std::string> fields = {"from", "message-id", "received"};
    std::ostringstream a, b;
    write_header_cache(a, recs, fields);
    write_header_cache(b, recs, fields);
    CHECK(a.str() == b.str());
    // Multi-valued fields hold quoted newlines; count record ends only.
    std::size_t lines = 0;
    bool quoted = false;
    for (char c : a.str()) {
      if (c == '"') quoted = !quoted;
      lines += c == '\n' && !quoted;
    }
    CHECK(lines == 5);  // header row + 4 emails
  }
}
