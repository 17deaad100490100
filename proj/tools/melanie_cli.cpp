// melanie: command-line front end for data generation, meta-training,
// adaptation, evaluation, simulation and reporting.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "melanie/env/episode.hpp"
#include "melanie/graph/io.hpp"
#include "melanie/harness/config.hpp"
#include "melanie/harness/experiment.hpp"
#include "melanie/nn/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace melanie;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string out;
  std::vector<std::string> set;
  std::map<std::string, std::string> train;
};

harness::RunConfig resolve(const GlobalFlags& g) {
  harness::RunConfig c = g.config.empty() ? harness::RunConfig{} : harness::load_run_config(g.config);
  if (!g.variant.empty()) harness::apply_override(c, "variant", "\"" + g.variant + "\"");
  if (!g.out.empty()) c.out = g.out;
  if (g.seed) c.seeds = {*g.seed};
  for (const auto& [key, value] : g.train) {
    if (!value.empty()) harness::apply_override(c, key, value);
  }
  for (const std::string& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    harness::apply_override(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  harness::validate(c);
  return c;
}

fs::path run_dir(const harness::RunConfig& c, std::uint64_t seed) {
  return c.out / c.name / std::to_string(seed);
}

fs::path ensure(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text << '\n';
}

int cmd_generate(const harness::RunConfig& c, const std::string& dir) {
  const fs::path target = dir.empty() ? c.out / c.name / "data" : fs::path(dir);
  const auto events = harness::generate_events(c.data);
  graph::write_events(events, ensure(target));
  write_text(target / "synthetic.json", graph::to_json(c.data.synthetic));
  std::cout << "wrote " << events.size() << " events to " << target.string() << '\n';
  return 0;
}

int cmd_meta_train(const harness::RunConfig& c) {
  const harness::Dataset data = harness::build_dataset(c);
  for (std::uint64_t seed : c.seeds) {
    const fs::path root = run_dir(c, seed);
    const harness::GlobalModel g = harness::train_global(c, data, seed);
    nn::save_checkpoint(ensure(root / "checkpoints") / "global.json", g.params);
    if (g.meta) {
      meta::write_meta_log(ensure(root / "logs") / "meta_train.csv", g.meta->log);
      if (c.variant.use_signature_buffer) {
        g.meta->buffer.save(root / "checkpoints" / "signature_buffer.json");
      }
      std::cout << "seed " << seed << ": " << g.meta->epochs_run << " epoch(s), best "
                << g.meta->best_epoch << '\n';
    } else {
      std::cout << "seed " << seed << ": " << c.variant.name
                << " has no meta stage; wrote initial parameters\n";
    }
  }
  return 0;
}

fs::path checkpoint_or(const std::string& flag, const fs::path& fallback) {
  const fs::path p = flag.empty() ? fallback : fs::path(flag);
  if (!fs::exists(p)) throw std::invalid_argument("checkpoint not found: " + p.string());
  return p;
}

int cmd_adapt(const harness::RunConfig& c, const std::string& checkpoint) {
  const harness::Dataset data = harness::build_dataset(c);
  for (std::uint64_t seed : c.seeds) {
    const fs::path root = run_dir(c, seed);
    const nn::ParameterSet global =
        nn::load_checkpoint(checkpoint_or(checkpoint, root / "checkpoints" / "global.json"), c.dims);
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const harness::TaskOutcome o =
          harness::adapt_and_evaluate(global, data.test[i], c, seed * 104729 + 17 + i);
      const std::string id = data.test[i].network.event_id();
      nn::save_checkpoint(ensure(root / "checkpoints") / ("adapted-" + id + ".json"),
                          o.adaptation.params);
      agent::write_adaptation_log(ensure(root / "logs") / ("adapt-" + id + ".csv"), o.adaptation.log);
      std::cout << id << ": " << o.adaptation.log.size() << " step(s)\n";
    }
  }
  return 0;
}

int cmd_evaluate(const harness::RunConfig& c, const std::string& checkpoint) {
  const harness::Dataset data = harness::build_dataset(c);
  const auto make_env = harness::environment_factory(c);
  for (std::uint64_t seed : c.seeds) {
    const fs::path root = run_dir(c, seed);
    std::ofstream csv(ensure(root / "reports") / "eval.csv");
    csv << "event_id,rmse,mae,mse,num_query_interactions,mean_reward,intra_office_rate\n";
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      const graph::Task& task = data.test[i];
      const std::string id = task.network.event_id();
      const nn::ParameterSet params = nn::load_checkpoint(
          checkpoint_or(checkpoint, root / "checkpoints" / ("adapted-" + id + ".json")), c.dims);
      const std::uint64_t s = seed * 104729 + 17 + i;
      env::StreamingEnvironment query = make_env(task, env::Phase::kQuery, s + 1);
      const harness::EvalReport r = harness::evaluate(params, query, c.train.encoder, s + 2);
      write_text(root / "reports" / (id + ".json"), harness::report_to_json(r));
      harness::write_residuals_csv(root / "reports" / (id + ".residuals.csv"), r);
      harness::write_reward_curve_csv(ensure(root / "curves") / (id + ".csv"), r.reward_curve);
      csv << id << ',' << graph::format_double(r.rmse) << ',' << graph::format_double(r.mae) << ','
          << graph::format_double(r.mse) << ',' << r.num_query_interactions << ','
          << graph::format_double(r.mean_reward) << ',' << graph::format_double(r.intra_office_rate)
          << '\n';
      std::cout << id << ": rmse " << r.rmse << " mae " << r.mae << " mse " << r.mse << '\n';
    }
  }
  return 0;
}

int cmd_simulate(const harness::RunConfig& c, const std::string& checkpoint, double epsilon,
                 const std::string& phase_name) {
  const harness::Dataset data = harness::build_dataset(c);
  const auto make_env = harness::environment_factory(c);
  env::Phase phase = env::Phase::kFull;
  if (phase_name == "support") phase = env::Phase::kSupport;
  else if (phase_name == "query") phase = env::Phase::kQuery;
  else if (phase_name != "full") throw std::invalid_argument("--phase must be support, query or full");
  for (std::uint64_t seed : c.seeds) {
    const fs::path root = run_dir(c, seed);
    const fs::path fallback = root / "checkpoints" / "global.json";
    const nn::ParameterSet params =
        checkpoint.empty() && !fs::exists(fallback)
            ? nn::ParameterSet::initialize(c.dims, seed)
            : nn::load_checkpoint(checkpoint_or(checkpoint, fallback), c.dims);
    for (const graph::Task& task : data.test) {
      env::StreamingEnvironment e = make_env(task, phase, seed);
      const env::Episode ep = env::run_episode(e, params, epsilon, seed, c.train.encoder);
      const std::string id = task.network.event_id();
      env::write_trajectory_csv(ensure(root / "logs") / ("trajectory-" + id + ".csv"), ep.transitions);
      const auto curve = harness::average_reward_curve(ep.minutes, static_cast<int>(e.num_viewers()));
      harness::write_reward_curve_csv(ensure(root / "curves") / ("simulate-" + id + ".csv"), curve);
      double total = 0.0;
      for (const auto& t : ep.transitions) total += t.reward;
      std::cout << id << ": " << ep.transitions.size() << " actions, mean reward "
                << (ep.transitions.empty() ? 0.0 : total / static_cast<double>(ep.transitions.size()))
                << ", mismatches " << ep.mismatches << '\n';
    }
  }
  return 0;
}

void print_summary(const harness::Summary& s) {
  std::cout << std::fixed << std::setprecision(4) << s.variant << "  seeds=" << s.seeds.size()
            << "  rmse " << s.rmse_mean << " +- " << s.rmse_std << "  mae " << s.mae_mean << " +- "
            << s.mae_std << "  mse " << s.mse_mean << " +- " << s.mse_std << '\n';
}

int cmd_run(const harness::RunConfig& c) {
  print_summary(harness::run_experiment(c, true));
  return 0;
}

// Rebuilds the summary table from the per-seed eval.csv files on disk.
int cmd_report(const harness::RunConfig& c) {
  const fs::path base = c.out / c.name;
  if (!fs::is_directory(base)) throw std::invalid_argument("no run directory " + base.string());
  std::vector<harness::SeedResult> seeds;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (entry.is_directory() && fs::exists(entry.path() / "reports" / "eval.csv")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path& dir : dirs) {
    harness::SeedResult r;
    r.seed = std::stoull(dir.filename().string());
    std::ifstream in(dir / "reports" / "eval.csv");
    std::string line;
    std::getline(in, line);
    double rmse = 0, mae = 0, mse = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> f;
      while (std::getline(ss, field, ',')) f.push_back(field);
      if (f.size() < 4) throw std::runtime_error("malformed row in " + (dir / "reports/eval.csv").string());
      harness::EvalReport e;
      e.event_id = f[0];
      e.rmse = std::stod(f[1]);
      e.mae = std::stod(f[2]);
      e.mse = std::stod(f[3]);
      rmse += e.rmse;
      mae += e.mae;
      mse += e.mse;
      r.reports.push_back(e);
    }
    if (r.reports.empty()) continue;
    const auto n = static_cast<double>(r.reports.size());
    r.rmse = rmse / n;
    r.mae = mae / n;
    r.mse = mse / n;
    seeds.push_back(std::move(r));
  }
  if (seeds.empty()) throw std::invalid_argument("no reports under " + base.string());
  const harness::Summary s = harness::summarize(c.variant.name, std::move(seeds));
  harness::write_summary(base, s);
  print_summary(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned tracker for live video streaming events"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Run a single seed instead of the configured list");
  app.add_option("--variant", g.variant, "MELANIE, MELANIE-M, MELANIE-B or MELANIE-T");
  app.add_option("--out", g.out, "Output root (runs/<name>/<seed>/ lives below it)");
  app.add_option("--set", g.set, "Override any config key: section.key=value");
  for (const std::string& key : harness::config_keys(harness::RunConfig{}, "train")) {
    app.add_option("--" + key, g.train[key], "Override " + key);
  }

  std::string data_dir;
  auto* generate = app.add_subcommand("generate", "Write synthetic event traces");
  generate->add_option("--dir", data_dir, "Target directory (default <out>/<name>/data)");

  auto* meta_train = app.add_subcommand("meta-train", "Meta-train the global parameters");

  std::string checkpoint;
  auto* adapt = app.add_subcommand("adapt", "Adapt global parameters to each test event");
  adapt->add_option("--checkpoint", checkpoint, "Global checkpoint (default from the run directory)");

  auto* evaluate = app.add_subcommand("evaluate", "Score adapted parameters on the query sets");
  evaluate->add_option("--checkpoint", checkpoint, "Use this checkpoint for every test event");

  double epsilon = 0.0;
  std::string phase = "full";
  auto* simulate = app.add_subcommand("simulate", "Play test events and export trajectories");
  simulate->add_option("--checkpoint", checkpoint, "Parameters to act with");
  simulate->add_option("--epsilon", epsilon, "Exploration rate")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--phase", phase, "support, query or full");

  auto* run = app.add_subcommand("run", "Meta-train, adapt and evaluate every configured seed");
  auto* report = app.add_subcommand("report", "Summarize persisted per-seed reports");

  CLI11_PARSE(app, argc, argv);

  try {
    const harness::RunConfig c = resolve(g);
    if (generate->parsed()) return cmd_generate(c, data_dir);
    if (meta_train->parsed()) return cmd_meta_train(c);
    if (adapt->parsed()) return cmd_adapt(c, checkpoint);
    if (evaluate->parsed()) return cmd_evaluate(c, checkpoint);
    if (simulate->parsed()) return cmd_simulate(c, checkpoint, epsilon, phase);
    if (run->parsed()) return cmd_run(c);
    if (report->parsed()) return cmd_report(c);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
