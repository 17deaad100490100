#include "melanie/harness/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "melanie/graph/io.hpp"
#include "melanie/nn/checkpoint.hpp"

namespace melanie::harness {
namespace {

std::string event_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "event-%02d", i);
  return buf;
}

agent::TrainConfig train_config(const RunConfig& config, std::uint64_t seed) {
  agent::TrainConfig t = config.train;
  t.use_kl_priority = t.use_kl_priority && config.variant.use_kl_priority;
  t.seed = seed;
  return t;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text << '\n';
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<graph::TemporalInteractionNetwork> generate_events(const DataConfig& data) {
  std::vector<graph::TemporalInteractionNetwork> out;
  out.reserve(static_cast<std::size_t>(data.num_events));
  for (int i = 0; i < data.num_events; ++i) {
    out.push_back(graph::generate_synthetic_event(
        data.synthetic, data.event_seed + static_cast<std::uint64_t>(i), event_name(i)));
  }
  return out;
}

Dataset build_dataset(const RunConfig& config) {
  validate(config);
  const DataConfig& d = config.data;
  std::vector<graph::TemporalInteractionNetwork> events;
  if (d.source == "synthetic") {
    events = generate_events(d);
  } else {
    if (!std::filesystem::is_directory(d.directory)) {
      throw std::invalid_argument("config key 'data.directory': no such directory " +
                                  d.directory.string());
    }
    events = graph::load_events(d.directory);
  }
  const auto needed = static_cast<std::size_t>(d.train_events + d.validation_events + d.test_events);
  if (events.size() < needed) {
    throw std::invalid_argument("config key 'data': need " + std::to_string(needed) +
                                " events, found " + std::to_string(events.size()));
  }
  Dataset out;
  for (std::size_t i = 0; i < needed; ++i) {
    const graph::TemporalInteractionNetwork net = config.env.mode == env::Mode::kReplay
                                                      ? graph::normalize_throughput(events[i])
                                                      : events[i];
    graph::Task task = graph::split_task(net, d.split_ratio);
    if (i < static_cast<std::size_t>(d.train_events)) {
      out.train.push_back(std::move(task));
    } else if (i < static_cast<std::size_t>(d.train_events + d.validation_events)) {
      out.validation.push_back(std::move(task));
    } else {
      out.test.push_back(std::move(task));
    }
  }
  return out;
}

meta::EnvironmentFactory environment_factory(const RunConfig& config) {
  const env::Mode mode = config.env.mode;
  const graph::SyntheticEventConfig synthetic = config.data.synthetic;
  return [mode, synthetic](const graph::Task& task, env::Phase phase, std::uint64_t seed) {
    return mode == env::Mode::kReplay
               ? env::StreamingEnvironment::replay(task, phase)
               : env::StreamingEnvironment::generative(task, synthetic, seed, phase);
  };
}

TaskOutcome adapt_and_evaluate(const nn::ParameterSet& global, const graph::Task& task,
                               const RunConfig& config, std::uint64_t seed) {
  const auto make_env = environment_factory(config);
  const agent::TrainConfig train = train_config(config, seed);
  env::StreamingEnvironment support = make_env(task, env::Phase::kSupport, seed);
  TaskOutcome out;
  out.adaptation = agent::adapt_task(global, task, train, support);
  env::StreamingEnvironment query = make_env(task, env::Phase::kQuery, seed + 1);
  out.report = evaluate(out.adaptation.params, query, train.encoder, seed + 2);
  return out;
}

GlobalModel train_global(const RunConfig& config, const Dataset& data, std::uint64_t seed) {
  GlobalModel out{nn::ParameterSet::initialize(config.dims, seed), std::nullopt};
  if (!config.variant.use_meta) return out;

  meta::MetaConfig mc = config.meta;
  mc.seed = seed;
  mc.use_signature_buffer = config.variant.use_signature_buffer;
  meta::ValidationScore score;
  if (!data.validation.empty()) {
    score = [&config, &data, seed](const nn::ParameterSet& params) {
      double s = 0.0;
      for (std::size_t i = 0; i < data.validation.size(); ++i) {
        s += adapt_and_evaluate(params, data.validation[i], config, seed * 7919 + 101 + i)
                 .report.rmse;
      }
      return s / static_cast<double>(data.validation.size());
    };
  }
  out.meta = meta::meta_train(data.train, mc, train_config(config, seed), config.dims,
                              environment_factory(config), score, out.params);
  out.params = out.meta->params;
  return out;
}

SeedResult run_seed(const RunConfig& config, const Dataset& data, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& root) {
  namespace fs = std::filesystem;
  if (root) {
    for (const char* sub : {"checkpoints", "reports", "curves", "logs"}) {
      fs::create_directories(*root / sub);
    }
  }
  const GlobalModel global = train_global(config, data, seed);
  SeedResult out;
  out.seed = seed;
  if (global.meta) {
    out.meta_epochs = global.meta->epochs_run;
    if (root) {
      meta::write_meta_log(*root / "logs" / "meta_train.csv", global.meta->log);
      if (config.variant.use_signature_buffer) {
        global.meta->buffer.save(*root / "checkpoints" / "signature_buffer.json");
      }
    }
  }
  if (root) nn::save_checkpoint(*root / "checkpoints" / "global.json", global.params);

  std::vector<double> rmse, mae, mse;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    const graph::Task& task = data.test[i];
    TaskOutcome o = adapt_and_evaluate(global.params, task, config, seed * 104729 + 17 + i);
    if (root) {
      const std::string id = task.network.event_id();
      nn::save_checkpoint(*root / "checkpoints" / ("adapted-" + id + ".json"), o.adaptation.params);
      agent::write_adaptation_log(*root / "logs" / ("adapt-" + id + ".csv"), o.adaptation.log);
      write_text(*root / "reports" / (id + ".json"), report_to_json(o.report));
      write_residuals_csv(*root / "reports" / (id + ".residuals.csv"), o.report);
      write_reward_curve_csv(*root / "curves" / (id + ".csv"), o.report.reward_curve);
    }
    rmse.push_back(o.report.rmse);
    mae.push_back(o.report.mae);
    mse.push_back(o.report.mse);
    out.reports.push_back(std::move(o.report));
  }
  out.rmse = mean_of(rmse);
  out.mae = mean_of(mae);
  out.mse = mean_of(mse);
  if (root) {
    std::ofstream csv(*root / "reports" / "eval.csv");
    csv << "event_id,rmse,mae,mse,num_query_interactions,mean_reward,intra_office_rate\n";
    for (const EvalReport& r : out.reports) {
      csv << r.event_id << ',' << graph::format_double(r.rmse) << ','
          << graph::format_double(r.mae) << ',' << graph::format_double(r.mse) << ','
          << r.num_query_interactions << ',' << graph::format_double(r.mean_reward) << ','
          << graph::format_double(r.intra_office_rate) << '\n';
    }
  }
  return out;
}

Summary summarize(const std::string& variant, std::vector<SeedResult> seeds) {
  Summary s;
  s.variant = variant;
  std::vector<double> rmse, mae, mse;
  for (const SeedResult& r : seeds) {
    rmse.push_back(r.rmse);
    mae.push_back(r.mae);
    mse.push_back(r.mse);
  }
  s.seeds = std::move(seeds);
  s.rmse_mean = mean_of(rmse);
  s.rmse_std = std_of(rmse);
  s.mae_mean = mean_of(mae);
  s.mae_std = std_of(mae);
  s.mse_mean = mean_of(mse);
  s.mse_std = std_of(mse);
  return s;
}

Summary run_experiment(const RunConfig& config, bool write_artifacts) {
  const Dataset data = build_dataset(config);
  const std::filesystem::path base = config.out / config.name;
  std::vector<SeedResult> results;
  for (std::uint64_t seed : config.seeds) {
    std::optional<std::filesystem::path> root;
    if (write_artifacts) root = base / std::to_string(seed);
    results.push_back(run_seed(config, data, seed, root));
  }
  Summary s = summarize(config.variant.name, std::move(results));
  if (write_artifacts) {
    write_text(base / "config.json", to_json(config));
    write_summary(base, s);
  }
  return s;
}

Summary run_experiment(const std::filesystem::path& config_file) {
  return run_experiment(load_run_config(config_file), true);
}

std::string summary_to_json(const Summary& s) {
  nlohmann::ordered_json doc;
  doc["variant"] = s.variant;
  doc["num_seeds"] = s.seeds.size();
  doc["rmse"] = {{"mean", s.rmse_mean}, {"std", s.rmse_std}};
  doc["mae"] = {{"mean", s.mae_mean}, {"std", s.mae_std}};
  doc["mse"] = {{"mean", s.mse_mean}, {"std", s.mse_std}};
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const SeedResult& r : s.seeds) {
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const EvalReport& e : r.reports) {
      events.push_back({{"event_id", e.event_id}, {"rmse", e.rmse}, {"mae", e.mae}, {"mse", e.mse}});
    }
    seeds.push_back({{"seed", r.seed},
                     {"rmse", r.rmse},
                     {"mae", r.mae},
                     {"mse", r.mse},
                     {"meta_epochs", r.meta_epochs},
                     {"events", events}});
  }
  doc["seeds"] = seeds;
  return doc.dump(2);
}

void write_summary(const std::filesystem::path& dir, const Summary& s) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "summary.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
  csv << "variant,num_seeds,rmse_mean,rmse_std,mae_mean,mae_std,mse_mean,mse_std\n";
  csv << s.variant << ',' << s.seeds.size() << ',' << graph::format_double(s.rmse_mean) << ','
      << graph::format_double(s.rmse_std) << ',' << graph::format_double(s.mae_mean) << ','
      << graph::format_double(s.mae_std) << ',' << graph::format_double(s.mse_mean) << ','
      << graph::format_double(s.mse_std) << '\n';
  write_text(dir / "summary.json", summary_to_json(s));
}

}  // namespace melanie::harness
