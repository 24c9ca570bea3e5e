#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "promptpg/checkpoint.hpp"
#include "promptpg/dataset.hpp"
#include "promptpg/errors.hpp"
#include "promptpg/http_oracle.hpp"
#include "promptpg/kernels.hpp"
#include "promptpg/manifest.hpp"
#include "promptpg/metrics.hpp"
#include "promptpg/oracle.hpp"
#include "promptpg/planted.hpp"
#include "promptpg/pmi.hpp"
#include "promptpg/trainer.hpp"

namespace {

using namespace promptpg;

void warn(const std::string& message) {
  std::cerr << "warning: " << message << '\n';
}

std::unique_ptr<Oracle> make_oracle(const std::string& synthetic_path,
                                    BudgetLedger& ledger, BillingUnit billing) {
  if (!synthetic_path.empty())
    return std::make_unique<PlantedOracle>(PlantedTaskSpec::load(synthetic_path),
                                           ledger, billing);
  return std::make_unique<HttpOracle>(HttpOracleConfig::from_env(), ledger,
                                      billing);
}

RunManifest begin_manifest(const std::string& command,
                           nlohmann::ordered_json config) {
  RunManifest m;
  m.command = command;
  m.config = std::move(config);
  m.source_revision = source_revision();
  m.started_at = now_iso8601_utc();
  return m;
}

struct BuildVocabArgs {
  std::string corpus;
  std::string out;
  PmiConfig pmi;
};

int run_build_vocab(const BuildVocabArgs& args) {
  args.pmi.validate();
  const auto corpus = load_corpus(args.corpus);
  const CandidateVocabulary vocab = build_vocab(corpus, args.pmi);
  vocab.save(args.out);
  std::cout << "wrote " << vocab.size() << " candidate n-grams to " << args.out
            << '\n';
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string vocab;
  std::string verbalizer;
  std::string out;
  std::string synthetic;
  TrainConfig config;
};

int run_train(TrainArgs args) {
  args.config.validate();
  for (const std::string& w : args.config.warnings()) warn(w);

  CandidateVocabulary vocab = CandidateVocabulary::load(args.vocab);
  if (vocab.size() < args.config.vocab_size) {
    warn("vocabulary has only " + std::to_string(vocab.size()) +
         " entries; lowering vocab_size");
    args.config.vocab_size = vocab.size();
  } else if (vocab.size() > args.config.vocab_size) {
    vocab.entries.resize(args.config.vocab_size);
  }
  if (vocab.size() < 2) throw ConfigError("vocabulary needs >= 2 entries");

  const Dataset data = load_tsv(args.dataset);
  const Verbalizer verbalizer = Verbalizer::load(args.verbalizer);
  const FewShotSplit split = make_few_shot_split(
      data, verbalizer.labels, args.config.shots, args.config.seed);
  if (split.truncated)
    warn("some class has fewer than 2*shots examples; split was truncated");

  RunManifest manifest = begin_manifest("train", args.config.to_json());
  manifest.add_input(args.dataset);
  manifest.add_input(args.vocab);
  manifest.add_input(args.verbalizer);
  if (!args.synthetic.empty()) manifest.add_input(args.synthetic);
  const std::string manifest_path = args.out + ".manifest.json";

  BudgetLedger ledger(args.config.budget);
  const auto oracle = make_oracle(args.synthetic, ledger, args.config.billing);
  Trainer trainer(*oracle, vocab, verbalizer, args.config);

  TrainResult result;
  try {
    result = trainer.train(split, args.out);
  } catch (const Error& e) {
    manifest.finished_at = now_iso8601_utc();
    manifest.billed_calls = ledger.used();
    manifest.metrics["error"] = e.what();
    manifest.save(manifest_path);
    throw;
  }

  for (const EpochRecord& ep : result.epochs)
    std::printf("epoch %zu/%zu train_loss %.4f dev %s %.4f billed %zu\n",
                ep.epoch, args.config.epochs, ep.mean_train_loss,
                metric_name(args.config.dev_metric), ep.dev_metric,
                ep.billed_after);
  std::printf("best dev %s %.4f (epoch %zu); billed %zu/%zu\n",
              metric_name(args.config.dev_metric), result.best_dev,
              result.best_epoch, result.billed, args.config.budget);
  std::cout << "checkpoint written to " << args.out << '\n';

  manifest.finished_at = now_iso8601_utc();
  manifest.billed_calls = result.billed;
  manifest.metrics["best_dev"] = result.best_dev;
  manifest.metrics["best_epoch"] = result.best_epoch;
  manifest.metrics["dev_metric"] = metric_name(args.config.dev_metric);
  manifest.metrics["epochs_completed"] = result.epochs.size();
  manifest.save(manifest_path);
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string verbalizer;
  std::string synthetic;
  std::string metric = "accuracy";
  std::string placement;  // empty: use the checkpoint's
  std::string billing = "per_batch";
  std::size_t batch_size = 4;
  std::size_t budget = 8000;
  bool no_prompt = false;
};

int run_eval(const EvalArgs& args) {
  const Checkpoint ckpt = Checkpoint::load(args.checkpoint);
  const Dataset data = load_tsv(args.dataset);
  const Verbalizer verbalizer = Verbalizer::load(args.verbalizer);
  const Metric metric = parse_metric(args.metric);
  const Placement placement = args.placement.empty()
                                  ? ckpt.config.placement
                                  : parse_placement(args.placement);

  std::vector<std::string> prompt;
  if (!args.no_prompt) prompt = argmax_prompt(ckpt.distribution(), ckpt.vocab);

  nlohmann::ordered_json config;
  config["checkpoint"] = args.checkpoint;
  config["metric"] = args.metric;
  config["placement"] = placement_name(placement);
  config["batch_size"] = args.batch_size;
  config["budget"] = args.budget;
  config["no_prompt"] = args.no_prompt;
  RunManifest manifest = begin_manifest("eval", config);
  manifest.add_input(args.checkpoint);
  manifest.add_input(args.dataset);
  manifest.add_input(args.verbalizer);
  if (!args.synthetic.empty()) manifest.add_input(args.synthetic);
  const std::string manifest_path = args.checkpoint + ".eval-manifest.json";

  BudgetLedger ledger(args.budget);
  const auto oracle =
      make_oracle(args.synthetic, ledger, parse_billing(args.billing));
  double value = 0.0;
  try {
    value = evaluate(prompt, data, *oracle, verbalizer, metric, placement,
                     args.batch_size);
  } catch (const Error& e) {
    manifest.finished_at = now_iso8601_utc();
    manifest.billed_calls = ledger.used();
    manifest.metrics["error"] = e.what();
    manifest.save(manifest_path);
    throw;
  }

  std::printf("%s %.4f\n", metric_name(metric), value);
  std::printf("billed %zu/%zu\n", ledger.used(), args.budget);

  manifest.finished_at = now_iso8601_utc();
  manifest.billed_calls = ledger.used();
  manifest.metrics[metric_name(metric)] = value;
  manifest.save(manifest_path);
  return 0;
}

struct TransferArgs {
  std::string checkpoint;
  std::string dataset;
  std::string verbalizer;
  std::string synthetic;
  std::string metric = "accuracy";
  std::string billing = "per_batch";
  std::size_t batch_size = 4;
  std::size_t budget = 8000;
};

int run_transfer(const TransferArgs& args) {
  const Checkpoint ckpt = Checkpoint::load(args.checkpoint);
  const Dataset data = load_tsv(args.dataset);
  const Verbalizer verbalizer = Verbalizer::load(args.verbalizer);
  const Metric metric = parse_metric(args.metric);

  nlohmann::ordered_json config;
  config["checkpoint"] = args.checkpoint;
  config["metric"] = args.metric;
  config["batch_size"] = args.batch_size;
  config["budget"] = args.budget;
  RunManifest manifest = begin_manifest("transfer", config);
  manifest.add_input(args.checkpoint);
  manifest.add_input(args.dataset);
  manifest.add_input(args.verbalizer);
  if (!args.synthetic.empty()) manifest.add_input(args.synthetic);
  const std::string manifest_path =
      args.checkpoint + ".transfer-manifest.json";

  BudgetLedger ledger(args.budget);
  const auto oracle =
      make_oracle(args.synthetic, ledger, parse_billing(args.billing));
  TransferResult result;
  try {
    result = transfer(ckpt, data, *oracle, verbalizer, metric,
                      args.batch_size);
  } catch (const Error& e) {
    manifest.finished_at = now_iso8601_utc();
    manifest.billed_calls = ledger.used();
    manifest.metrics["error"] = e.what();
    manifest.save(manifest_path);
    throw;
  }

  std::cout << "prompt:";
  for (const std::string& t : result.prompt_tokens) std::cout << ' ' << t;
  std::cout << '\n';
  std::printf("%s %.4f\n", metric_name(metric), result.metric);
  std::printf("billed %zu/%zu\n", ledger.used(), args.budget);

  manifest.finished_at = now_iso8601_utc();
  manifest.billed_calls = ledger.used();
  manifest.metrics[metric_name(metric)] = result.metric;
  manifest.save(manifest_path);
  return 0;
}

struct GenPlantedArgs {
  std::string out_dir;
  PlantedTaskParams params;
};

int run_gen_planted(const GenPlantedArgs& args) {
  args.params.validate();
  const PlantedTask task = make_planted_task(args.params);
  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  task.spec.save(dir / "planted_spec.json");
  save_tsv(task.train_pool, dir / "train.tsv");
  save_tsv(task.test, dir / "test.tsv");
  task.vocab.save(dir / "vocab.txt");
  task.verbalizer.save(dir / "verbalizer.json");
  for (const char* name : {"planted_spec.json", "train.tsv", "test.tsv",
                           "vocab.txt", "verbalizer.json"})
    std::cout << "wrote " << (dir / name).string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-free prompt optimization over a scoring oracle"};
  app.require_subcommand(1);

  BuildVocabArgs bv;
  CLI::App* build_vocab_cmd = app.add_subcommand(
      "build-vocab", "Rank candidate n-grams from a text corpus");
  build_vocab_cmd->add_option("--corpus", bv.corpus, "text corpus, one line each")
      ->required();
  build_vocab_cmd->add_option("--out", bv.out, "output vocabulary file")
      ->required();
  build_vocab_cmd->add_option("--sigma", bv.pmi.sigma,
                              "segmentation threshold on pair PMI");
  build_vocab_cmd->add_option("--min-freq", bv.pmi.min_freq,
                              "minimum n-gram frequency");
  build_vocab_cmd->add_option("--max-vocab", bv.pmi.max_vocab,
                              "keep this many top n-grams");
  build_vocab_cmd->add_option("--max-ngram-len", bv.pmi.max_ngram_len,
                              "longest n-gram to count");

  TrainArgs tr;
  std::string loss_name_arg = "ce";
  std::string optimizer_arg = "projected_sgd";
  std::string placement_arg = "prefix";
  std::string dev_metric_arg = "accuracy";
  std::string billing_arg = "per_batch";
  CLI::App* train_cmd =
      app.add_subcommand("train", "Learn a prompt distribution");
  train_cmd->add_option("--dataset", tr.dataset, "label<TAB>text TSV")
      ->required();
  train_cmd->add_option("--vocab", tr.vocab, "candidate vocabulary file")
      ->required();
  train_cmd->add_option("--verbalizer", tr.verbalizer, "verbalizer JSON")
      ->required();
  train_cmd->add_option("--out", tr.out, "checkpoint output path")->required();
  train_cmd->add_option("--synthetic", tr.synthetic,
                        "planted task spec JSON (otherwise ORACLE_ENDPOINT)");
  train_cmd->add_option("--prompt-length", tr.config.prompt_length,
                        "prompt tokens to learn");
  train_cmd->add_option("--vocab-size", tr.config.vocab_size,
                        "candidates per position");
  train_cmd->add_option("--samples", tr.config.num_samples,
                        "prompts sampled per step");
  train_cmd->add_option("--lr", tr.config.learning_rate, "learning rate");
  train_cmd->add_option("--epochs", tr.config.epochs, "training epochs");
  train_cmd->add_option("--batch-size", tr.config.batch_size,
                        "examples per oracle call");
  train_cmd->add_option("--shots", tr.config.shots,
                        "few-shot examples per class (train and dev each)");
  train_cmd->add_option("--loss", loss_name_arg, "ce or hinge");
  train_cmd->add_option("--margin", tr.config.hinge_margin, "hinge margin");
  train_cmd->add_option("--optimizer", optimizer_arg,
                        "projected_sgd or projected_adam");
  train_cmd->add_option("--placement", placement_arg,
                        "prefix, suffix or infix");
  train_cmd->add_option("--dev-metric", dev_metric_arg,
                        "metric for model selection");
  train_cmd->add_option("--billing", billing_arg,
                        "per_batch or per_example");
  train_cmd->add_option("--budget", tr.config.budget, "billed-call limit");
  train_cmd->add_option("--seed", tr.config.seed, "random seed");

  EvalArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score a checkpointed prompt on a dataset");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "trained checkpoint")
      ->required();
  eval_cmd->add_option("--dataset", ev.dataset, "label<TAB>text TSV")
      ->required();
  eval_cmd->add_option("--verbalizer", ev.verbalizer, "verbalizer JSON")
      ->required();
  eval_cmd->add_option("--synthetic", ev.synthetic, "planted task spec JSON");
  eval_cmd->add_option("--metric", ev.metric,
                       "accuracy, f1, macro_f1 or mcc");
  eval_cmd->add_option("--placement", ev.placement,
                       "override the checkpoint placement");
  eval_cmd->add_option("--billing", ev.billing, "per_batch or per_example");
  eval_cmd->add_option("--batch-size", ev.batch_size, "examples per call");
  eval_cmd->add_option("--budget", ev.budget, "billed-call limit");
  eval_cmd->add_flag("--no-prompt", ev.no_prompt,
                     "score the bare inputs without any prompt");

  TransferArgs tf;
  CLI::App* transfer_cmd = app.add_subcommand(
      "transfer", "Reuse a trained prompt on a different task");
  transfer_cmd->add_option("--checkpoint", tf.checkpoint, "source checkpoint")
      ->required();
  transfer_cmd->add_option("--dataset", tf.dataset, "target test TSV")
      ->required();
  transfer_cmd->add_option("--verbalizer", tf.verbalizer,
                           "target verbalizer JSON")
      ->required();
  transfer_cmd->add_option("--synthetic", tf.synthetic,
                           "target planted task spec JSON");
  transfer_cmd->add_option("--metric", tf.metric,
                           "accuracy, f1, macro_f1 or mcc");
  transfer_cmd->add_option("--billing", tf.billing,
                           "per_batch or per_example");
  transfer_cmd->add_option("--batch-size", tf.batch_size,
                           "examples per call");
  transfer_cmd->add_option("--budget", tf.budget, "billed-call limit");

  GenPlantedArgs gp;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen-planted", "Generate a synthetic planted-token task");
  gen_cmd->add_option("--out-dir", gp.out_dir, "output directory")->required();
  gen_cmd->add_option("--prompt-length", gp.params.prompt_length,
                      "planned prompt length");
  gen_cmd->add_option("--vocab-size", gp.params.vocab_size,
                      "candidate tokens incl. the two planted ones");
  gen_cmd->add_option("--shots", gp.params.shots,
                      "train pool holds 2*shots per class");
  gen_cmd->add_option("--test-per-class", gp.params.test_per_class,
                      "held-out examples per class");
  gen_cmd->add_option("--signal", gp.params.signal,
                      "true-class score margin");
  gen_cmd->add_option("--weight", gp.params.weight,
                      "score bump per planted token occurrence");
  gen_cmd->add_option("--prefix", gp.params.input_prefix, "input id prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    promptpg::kernels::select_from_env();
    tr.config.loss = promptpg::parse_loss(loss_name_arg);
    tr.config.optimizer = promptpg::parse_optimizer(optimizer_arg);
    tr.config.placement = promptpg::parse_placement(placement_arg);
    tr.config.dev_metric = promptpg::parse_metric(dev_metric_arg);
    tr.config.billing = promptpg::parse_billing(billing_arg);

    if (build_vocab_cmd->parsed()) return run_build_vocab(bv);
    if (train_cmd->parsed()) return run_train(std::move(tr));
    if (eval_cmd->parsed()) return run_eval(ev);
    if (transfer_cmd->parsed()) return run_transfer(tf);
    if (gen_cmd->parsed()) return run_gen_planted(gp);
    std::cerr << "error: no command\n";
    return 2;
  } catch (const promptpg::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const promptpg::OracleUnavailable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const promptpg::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const promptpg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const promptpg::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
