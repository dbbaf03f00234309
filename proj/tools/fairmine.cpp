#include <CLI11.hpp>
#include <iostream>

#include "fairmine/harness.hpp"

using namespace fairmine;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;
constexpr int kResolutionError = 3;

ExperimentConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                             const std::string& dataset) {
  ExperimentConfig c = path.empty() ? ExperimentConfig::parse("") : ExperimentConfig::load(path);
  if (seed) c.set_seed(*seed);
  if (!dataset.empty()) c.dataset_path = dataset;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware triplet training on synthetic selfie/document pairs"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, resume, dataset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stop_after;
  std::vector<std::string> run_dirs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the root seed");
  };

  auto* gen = app.add_subcommand("generate", "Write the training dataset to a file");
  add_common(gen);
  gen->add_option("--out,-o", out, "Dataset file")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  add_common(train);
  train->add_option("--out,-o", out, "Run directory")->required();
  train->add_option("--dataset", dataset, "Training dataset file instead of generating one");
  train->add_option("--resume", resume, "Checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_option("--stop-after", stop_after, "Stop after this many optimizer steps");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out test data");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--out,-o", out, "Report directory")->required();

  auto* exp = app.add_subcommand("export", "Export embeddings of the test split or a dataset file");
  add_common(exp);
  exp->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  exp->add_option("--dataset", dataset, "Dataset file to embed");
  exp->add_option("--out,-o", out, "CSV file")->required();

  auto* rep = app.add_subcommand("report", "Aggregate reports of several runs into CSV tables");
  rep->add_option("runs", run_dirs, "Run directories containing report.json")->required();
  rep->add_option("--out,-o", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto c = load_config(config_path, seed, "");
      write_dataset(out, generate_dataset(c.generator));
      std::cout << "wrote " << c.generator.n_pairs << " pairs to " << out << '\n';
    } else if (*train) {
      const auto c = load_config(config_path, seed, dataset);
      TrainOptions opts;
      opts.out_dir = out;
      if (!resume.empty()) opts.resume = resume;
      opts.stop_after = stop_after;
      const TrainResult r = run_training(c, opts);
      std::cout << (r.finished ? "finished" : "stopped") << " at step " << r.record.steps << ", config "
                << r.record.config_hash << '\n';
      if (r.finished) {
        write_eval_report(out, evaluate(c, r.network), &r.record);
        std::cout << "report written to " << out << '\n';
      }
    } else if (*eval) {
      const auto c = load_config(config_path, seed, "");
      const Checkpoint ck = load_checkpoint(checkpoint, c.hash());
      const auto report = evaluate(c, ck.network());
      write_eval_report(out, report);
      std::cout << "theta " << report.theta << "  FAR " << rate(report.overall_far) << "  FRR "
                << report.overall_frr() << "  worst/overall " << report.worst_ratio() << '\n';
    } else if (*exp) {
      const auto c = load_config(config_path, seed, "");
      const Checkpoint ck = load_checkpoint(checkpoint, c.hash());
      const Dataset data = dataset.empty() ? test_dataset(c) : read_dataset(dataset);
      write_embeddings(out, export_embeddings(ck.network(), data), c.hash_hex());
    } else if (*rep) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      aggregate_reports(dirs, out);
    }
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return kResolutionError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
