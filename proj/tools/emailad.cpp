// Command-line front end: ingest, headers-report, run, classify, importance, synth.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emailad/bundle.hpp"
#include "emailad/error.hpp"
#include "emailad/pipeline.hpp"
#include "emailad/synth.hpp"
#include "emailad/util.hpp"

namespace fs = std::filesystem;
using namespace emailad;

namespace {

constexpr int kExitError = 2;

struct Common {
  std::string config;
  std::string phase = "all";
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads", c.threads, "Worker threads (0: all cores; results do not depend on it)");
}

RunConfig configured(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

std::vector<int> parse_phases(const std::string& p) {
  if (p == "all") return {1, 2, 3, 4};
  if (p.size() == 1 && p[0] >= '1' && p[0] <= '4') return {p[0] - '0'};
  throw InvalidArgument("--phase must be 1, 2, 3, 4 or all");
}

int cmd_ingest(const Common& c) {
  RunConfig cfg = configured(c);
  Datasets data = load_datasets(cfg, &std::cerr);
  fs::create_directories(cfg.output_dir);
  auto write = [&](const Corpus& corpus, const std::string& name) {
    const auto fields = top_k_fields(header_frequencies(corpus.records), cfg.k);
    const auto path = cfg.output_dir / ("cache_" + name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_header_cache(out, corpus.records, fields);
    std::cout << name << "\t" << corpus.records.size() << " rows\t" << fields.size() << " fields\t"
              << hex64(corpus_digest(corpus.records)) << "\t" << path.string() << "\n";
  };
  write(data.a, "A");
  if (data.b) write(*data.b, "B");
  return 0;
}

int cmd_headers_report(const Common& c, const std::string& dataset, std::size_t threshold) {
  RunConfig cfg = configured(c);
  Corpus corpus;
  if (dataset == "A") {
    corpus = load_trec_index(cfg.trec_index, cfg.trec_root, &std::cerr);
  } else if (dataset == "B") {
    if (cfg.phishing_dir.empty()) throw InvalidArgument("config has no dataset.phishing_dir");
    corpus = load_labeled_dir(cfg.phishing_dir, Label::Phishing, &std::cerr);
  } else {
    throw InvalidArgument("--dataset must be A or B");
  }
  const HeaderStats stats = header_frequencies(corpus.records);
  if (stats.total_emails == 0) {
    std::cerr << "warning: corpus is empty\n";
    return 0;
  }
  const auto ranked = top_k_fields(stats, stats.doc_freq.size());
  std::size_t above = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto df = stats.doc_freq.at(ranked[i]);
    if (df > threshold) ++above;
    std::cout << ranked[i] << "\t" << df << "\n";
    if (i + 1 == cfg.k && i + 1 < ranked.size()) std::cout << "---- top " << cfg.k << " ----\n";
  }
  std::cerr << stats.total_emails << " emails, " << ranked.size() << " distinct fields, " << above
            << " in more than " << threshold << " emails\n";
  return 0;
}

int cmd_run(const Common& c) {
  RunConfig cfg = configured(c);
  auto phases = parse_phases(c.phase);
  RunOutput out = run_pipeline(cfg, phases, &std::cerr);
  for (const auto& f : out.files) std::cout << f.string() << "\n";
  std::cout << "manifest_digest\t" << out.manifest["manifest_digest"].get<std::string>() << "\n";
  return 0;
}

int cmd_classify(const std::string& model_path, const std::string& email) {
  ModelBundle bundle = load_bundle(model_path);
  std::string raw;
  if (email.empty() || email == "-") {
    raw.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    raw = read_header_block(email);
  }
  Verdict v = classify_header(bundle, parse_headers(raw));
  std::cout << verdict_line(bundle, v) << "\n";
  return v.exit_code;
}

int cmd_importance(const Common& c) {
  RunConfig cfg = configured(c);
  auto phases = parse_phases(c.phase == "all" ? "1" : c.phase);
  Datasets data = load_datasets(cfg, &std::cerr);
  SelectionResult s = run_selection(phases[0], cfg, data, &std::cerr);
  if (!s.importance) {
    std::cout << "phase " << phases[0] << " uses every domain matching feature; no ranking is computed\n";
    for (const auto& n : s.selected) std::cout << n << "\n";
    return 0;
  }
  std::cout << "rank\tfeature\tmean_drop\tstddev\trepeats\tselected\n";
  std::size_t rank = 0;
  char buf[64];
  for (auto i : s.importance->ranking()) {
    const auto& f = s.importance->features[i];
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f", f.mean_drop, f.stddev);
    const bool sel = std::find(s.selected.begin(), s.selected.end(), f.name) != s.selected.end();
    std::cout << ++rank << "\t" << f.name << "\t" << buf << "\t" << f.repeats << "\t" << (sel ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_synth(const std::string& out, const SynthOptions& o) {
  SynthLayout layout = write_synthetic_corpus(out, o);
  nlohmann::json cfg = {{"dataset",
                         {{"trec_index", "trec/full/index"}, {"trec_root", "trec/full"}, {"phishing_dir", "phishing"}}},
                        {"seed", o.seed},
                        {"output_dir", "results"}};
  std::ofstream f(fs::path(out) / "config.json");
  f << cfg.dump(2) << "\n";
  std::cout << layout.trec_index.string() << "\n" << layout.phishing_dir.string() << "\n"
            << (fs::path(out) / "config.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Email header anomaly detection"};
  app.require_subcommand(1);
  Common common;

  auto* ingest = app.add_subcommand("ingest", "Extract header fields of the configured datasets into CSV caches");
  ingest->add_option("--config", common.config, "Run configuration (JSON)")->required();
  ingest->add_option("--out", common.out, "Output directory (overrides output_dir)");

  std::string dataset = "A";
  std::size_t threshold = 1000;
  auto* report = app.add_subcommand("headers-report", "Print header field document frequencies");
  report->add_option("--config", common.config, "Run configuration (JSON)")->required();
  report->add_option("--dataset", dataset, "A (ham/spam) or B (phishing)");
  report->add_option("--threshold", threshold, "Count fields present in more than this many emails");

  auto* run = app.add_subcommand("run", "Run the evaluation phases and write tables, models and a manifest");
  run->add_option("--config", common.config, "Run configuration (JSON)")->required();
  run->add_option("--phase", common.phase, "1, 2, 3, 4 or all");
  run->add_option("--seed", common.seed, "Override the config seed");
  run->add_option("--out", common.out, "Output directory (overrides output_dir)");
  add_threads(run, common);

  std::string model_path, email_path;
  auto* classify = app.add_subcommand("classify", "Classify one email with a saved model bundle");
  classify->add_option("--model", model_path, "Model bundle written by run")->required();
  classify->add_option("email", email_path, "Email file (default: stdin)");
  add_threads(classify, common);

  auto* importance = app.add_subcommand("importance", "Rank features by permutation importance for a phase");
  importance->add_option("--config", common.config, "Run configuration (JSON)")->required();
  importance->add_option("--phase", common.phase, "1, 2, 3 or 4 (default 1)");
  importance->add_option("--seed", common.seed, "Override the config seed");
  add_threads(importance, common);

  std::string synth_out;
  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write the planted-signal synthetic corpus and a config for it");
  synth->add_option("--out", synth_out, "Target directory")->required();
  synth->add_option("--seed", so.seed, "Generator seed");
  synth->add_option("--ham", so.ham, "Ham emails");
  synth->add_option("--spam", so.spam, "Spam emails");
  synth->add_option("--phishing", so.phishing, "Phishing emails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    set_num_threads(common.threads);
    if (*ingest) return cmd_ingest(common);
    if (*report) return cmd_headers_report(common, dataset, threshold);
    if (*run) return cmd_run(common);
    if (*classify) return cmd_classify(model_path, email_path);
    if (*importance) return cmd_importance(common);
    if (*synth) return cmd_synth(synth_out, so);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
