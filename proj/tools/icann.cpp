// Command-line front end: generate, train, eval, check.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <icann/icann.hh>

namespace fs = std::filesystem;
using namespace icann;

namespace {

enum Exit : int
{
  kOk      = 0,
  kOther   = 1,
  kConfig  = 2,
  kIo      = 3,
  kNumeric = 4,
  kCheck   = 5
};

std::string csv_name(const std::string& dataset) { return dataset + ".csv"; }

std::vector<Dataset> load_datasets(const std::vector<fs::path>& files) {
  std::vector<Dataset> r;
  for (const auto& f : files)
    r.push_back(io::read_dataset(f));
  return r;
}

/// Metrics and prediction CSVs for every dataset.
void report(const ViscoSolid<double>& model, const std::vector<Dataset>& data, const std::vector<std::string>& roles,
            const fs::path& out) {
  fs::create_directories(out / "predictions");
  std::vector<io::MetricsRow> rows;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Dataset& d = data[k];
    io::MetricsRow row{d.name, roles[k], &d, {d.name, {}, false}};
    std::vector<double> pred;
    try {
      pred               = rollout_s11(model, d.path);
      row.report.metrics = compute_metrics(pred, d.stress);
    } catch (const StepError& e) {
      row.report.failed = true;
      std::cerr << "warning: " << d.name << ": " << e.what() << '\n';
    } catch (const DomainError& e) {
      std::cerr << "warning: " << d.name << ": " << e.what() << '\n';
    }
    io::write_prediction(out / "predictions" / csv_name(d.name), d, pred);
    std::printf("%-24s %-5s eps = %-10.4g R2 = %.4g\n", d.name.c_str(), roles[k].c_str(), row.report.metrics.epsilon,
                row.report.metrics.r2);
    rows.push_back(std::move(row));
  }
  io::write_metrics(out / "metrics.csv", rows);
}

int cmd_generate(const io::RunConfig& cfg, const std::optional<fs::path>& out_override) {
  const fs::path dir = out_override.value_or(cfg.data_dir);
  fs::create_directories(dir);
  for (const auto& d : generate_artificial_dataset(cfg.reference, cfg.artificial)) {
    io::write_dataset(dir / csv_name(d.name), d);
    std::printf("%s (%zu samples)\n", (dir / csv_name(d.name)).string().c_str(), d.path.size());
  }
  return kOk;
}

int cmd_train(io::RunConfig cfg, const std::optional<std::uint64_t>& seed, const std::optional<fs::path>& out_override) {
  if (seed)
    cfg.train.seed = *seed;
  if (out_override)
    cfg.output = *out_override;
  if (cfg.train_data.empty())
    throw ConfigError("config lists no training datasets");
  const auto train_sets = load_datasets(cfg.train_data);
  const auto test_sets  = load_datasets(cfg.test_data);

  ViscoSolid<double> start = cfg.topology.make();
  const bool warm          = cfg.initial_weights.has_value();
  if (warm)
    start = io::read_weights(*cfg.initial_weights);

  const int every = std::max(1, cfg.train.epochs / 20);
  auto result     = train(start, train_sets, cfg.train, warm, [&](int epoch, double l) {
    if (epoch % every == 0)
      std::fprintf(stderr, "epoch %6d  loss %.6g\n", epoch, l);
    return true;
  });

  fs::create_directories(cfg.output);
  io::write_weights(cfg.output / "weights.txt", result.model);
  io::write_loss_history(cfg.output / "loss_history.csv", result.loss_history);

  std::vector<Dataset> all = train_sets;
  all.insert(all.end(), test_sets.begin(), test_sets.end());
  std::vector<std::string> roles(train_sets.size(), "train");
  roles.resize(all.size(), "test");
  report(result.model, all, roles, cfg.output);
  return kOk;
}

int cmd_eval(const fs::path& weights, const std::vector<fs::path>& data, const fs::path& out) {
  if (data.empty())
    throw ConfigError("no datasets given");
  const auto model = io::read_weights(weights);
  const auto sets  = load_datasets(data);
  report(model, sets, std::vector<std::string>(sets.size(), "eval"), out);
  return kOk;
}

int cmd_check(std::uint64_t seed, int instances) {
  std::vector<checks::CheckResult> all;
  for (auto& r : checks::thermodynamics(seed, instances))
    all.push_back(std::move(r));
  for (auto& r : checks::determinant_identity(seed + 1))
    all.push_back(std::move(r));
  all.push_back(checks::gradient_fidelity(seed + 2, 10));
  for (auto& r : checks::metrics_conformance())
    all.push_back(std::move(r));
  bool ok = true;
  for (const auto& r : all) {
    std::printf("%s  %s  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheck;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inelastic constitutive artificial neural networks for finite-strain viscoelasticity"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string weights;
  std::vector<std::string> data;
  int instances = 1000;

  auto* gen = app.add_subcommand("generate", "write the artificial reference datasets");
  gen->add_option("--config", config, "run config file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "output directory (default: data_dir of the config)");

  auto* tr = app.add_subcommand("train", "train a model and report metrics");
  tr->add_option("--config", config, "run config file")->required()->check(CLI::ExistingFile);
  tr->add_option("--seed", seed, "override the config seed");
  tr->add_option("--out", out, "output directory (default: output of the config)");

  auto* ev = app.add_subcommand("eval", "evaluate a weight file on datasets");
  ev->add_option("--weights", weights, "weight file")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data, "dataset CSV files")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", out, "output directory")->default_str("eval");

  auto* ck = app.add_subcommand("check", "run the randomized property suites");
  ck->add_option("--seed", seed, "first random seed");
  ck->add_option("--instances", instances, "thermodynamics instances")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(io::load_run_config(config), out ? std::optional<fs::path>(*out) : std::nullopt);
    if (tr->parsed())
      return cmd_train(io::load_run_config(config), seed, out ? std::optional<fs::path>(*out) : std::nullopt);
    if (ev->parsed())
      return cmd_eval(weights, std::vector<fs::path>(data.begin(), data.end()), out.value_or("eval"));
    if (ck->parsed())
      return cmd_check(seed.value_or(1), instances);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const StepError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const UnsupportedProtocolError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
