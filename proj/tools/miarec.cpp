// Command-line front end. Every run subcommand reads a flat `key = value`
// config (optional) and accepts `--key value` overrides for any config key.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "miarec/config.hpp"
#include "miarec/corpus.hpp"
#include "miarec/error.hpp"
#include "miarec/eval.hpp"
#include "miarec/gradcheck.hpp"
#include "miarec/pipeline.hpp"
#include "miarec/recommender.hpp"

using namespace miarec;

namespace {

constexpr int kExitUsage = 1;

RunConfig load_config(const std::string& path, const std::vector<std::string>& extras) {
  RunConfig config = path.empty() ? RunConfig() : RunConfig::from_file(path);
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& flag = extras[i];
    if (flag.rfind("--", 0) != 0) throw ConfigError("unexpected argument: " + flag);
    std::string key = flag.substr(2);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for --" + key);
      value = extras[++i];
    }
    config.set(key, value);
  }
  return config;
}

CorpusStore load_corpus(const RunConfig& config) {
  if (config.corpus_path().empty()) throw ConfigError("no corpus path configured (key: corpus)");
  return parse_jsonl_file(config.corpus_path());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::optional<ParamGroup> parse_group(const std::string& name) {
  for (ParamGroup g : {ParamGroup::ChannelWeights, ParamGroup::SharedWeights, ParamGroup::Attention,
                       ParamGroup::Alignment, ParamGroup::NodeFeatures, ParamGroup::EdgeAttention,
                       ParamGroup::PaperEmbeddings}) {
    if (to_string(g) == name) return g;
  }
  throw ConfigError("unknown parameter group: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"miarec: scholar-to-paper recommendation"};
  app.require_subcommand(1);

  std::string config_path;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "config file (key = value)");
    sub->allow_extras();
  };

  std::string ingest_path;
  auto* ingest = app.add_subcommand("ingest", "parse a corpus and print counts");
  ingest->add_option("corpus", ingest_path, "JSONL corpus (defaults to config corpus)");
  with_config(ingest);

  SyntheticParams synth_params;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a planted-community corpus");
  synth->add_option("-o,--out", synth_out, "output JSONL path")->required();
  synth->add_option("--communities", synth_params.n_communities)->capture_default_str();
  synth->add_option("--scholars-per", synth_params.scholars_per)->capture_default_str();
  synth->add_option("--papers-per-scholar", synth_params.papers_per_scholar)->capture_default_str();
  synth->add_option("--intra-cite-prob", synth_params.intra_cite_prob)->capture_default_str();
  synth->add_option("--seed", synth_params.seed)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train and write a checkpoint");
  with_config(train_cmd);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  with_config(evaluate_cmd);

  std::string scholar;
  std::size_t k = 10;
  auto* recommend = app.add_subcommand("recommend", "top-k papers for one scholar");
  recommend->add_option("scholar", scholar, "scholar id")->required();
  recommend->add_option("-k", k, "list length")->capture_default_str()->check(CLI::PositiveNumber);
  with_config(recommend);

  std::string corrupt;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--corrupt", corrupt, "perturb one group's analytic gradient");
  with_config(gradcheck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      write_text(synth_out, serialize_jsonl(generate_synthetic(synth_params)));
      return 0;
    }

    CLI::App* active = app.get_subcommands().front();
    const RunConfig config = load_config(config_path, active->remaining());

    if (*ingest) {
      const std::string path = ingest_path.empty() ? config.corpus_path() : ingest_path;
      if (path.empty()) throw ConfigError("no corpus path given");
      const CorpusStore corpus = parse_jsonl_file(path);
      if (corpus.paper_count() == 0) std::cerr << "warning: corpus " << path << " is empty\n";
      std::cout << format_summary(summarize(corpus, config.network_config()));
      return 0;
    }

    if (*train_cmd) {
      config.train_config();
      config.network_config();
      const CorpusStore corpus = load_corpus(config);
      const ModelCheckpoint ckpt = train_on_corpus(corpus, config, [](std::size_t epoch, double loss) {
        std::printf("epoch %zu loss %.6f\n", epoch, loss);
        std::fflush(stdout);
      });
      save_checkpoint(ckpt, config.checkpoint_path());
      std::printf("checkpoint written to %s\n", config.checkpoint_path().c_str());
      return 0;
    }

    if (*evaluate_cmd) {
      const CorpusStore corpus = load_corpus(config);
      const ModelCheckpoint ckpt = load_checkpoint(config.checkpoint_path());
      const MetricsReport report = evaluate_on_corpus(ckpt, corpus, config);
      const std::string text = format_report(report, config.entries());
      write_text(config.report_path(), text);
      std::cout << text;
      return 0;
    }

    if (*recommend) {
      const ModelCheckpoint ckpt = load_checkpoint(config.checkpoint_path());
      for (const Ranked& r : recommend_topk(ckpt, scholar, nullptr, k)) {
        std::printf("%s\t%.6f\n", r.paper_id.c_str(), r.score);
      }
      return 0;
    }

    if (*gradcheck) {
      GradcheckOptions options;
      options.reg_weight = config.train_config().reg_weight;
      options.gravitational_constant = config.network_config().gravitational_constant;
      if (!corrupt.empty()) options.corrupt = parse_group(corrupt);
      const GradcheckReport report = run_gradcheck(options);
      std::cout << format_gradcheck(report, options.tolerance);
      return report.all_passed() ? 0 : static_cast<int>(ErrorKind::Numeric);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::Data);
  }
  return kExitUsage;
}
