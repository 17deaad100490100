#include "melanie/meta/meta_train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "melanie/env/episode.hpp"
#include "melanie/graph/io.hpp"
#include "melanie/instrumentation.hpp"
#include "melanie/meta/meta_losses.hpp"

namespace melanie::meta {
namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

void validate(const MetaConfig& c) {
  if (!(c.meta_eta > 0.0)) throw std::invalid_argument("meta.meta_eta must be > 0");
  if (c.epochs < 1) throw std::invalid_argument("meta.epochs must be >= 1");
  if (c.tasks_per_epoch < 0) throw std::invalid_argument("meta.tasks_per_epoch must be >= 0");
  if (c.signature_buffer_capacity == 0) {
    throw std::invalid_argument("meta.signature_buffer_capacity must be > 0");
  }
  if (!(c.query_epsilon >= 0.0 && c.query_epsilon <= 1.0)) {
    throw std::invalid_argument("meta.query_epsilon must be in [0,1]");
  }
  if (c.patience < 1) throw std::invalid_argument("meta.patience must be >= 1");
  if (!(c.max_grad_norm >= 0.0)) throw std::invalid_argument("meta.max_grad_norm must be >= 0");
  if (c.optimizer != "sgd" && c.optimizer != "adam") {
    throw std::invalid_argument("meta.optimizer must be 'sgd' or 'adam'");
  }
}

MetaTrainResult meta_train(const std::vector<graph::Task>& tasks, const MetaConfig& config,
                           const agent::TrainConfig& train, const nn::NetworkDims& dims,
                           const EnvironmentFactory& make_env, const ValidationScore& validation,
                           std::optional<nn::ParameterSet> init) {
  validate(config);
  agent::validate(train);
  nn::validate(dims);
  if (tasks.empty()) throw std::invalid_argument("meta_train: no training tasks");
  for (const graph::Task& t : tasks) {
    if (t.support.empty() || t.query.empty()) {
      throw std::invalid_argument("meta_train: task " + t.network.event_id() +
                                  " has an empty support or query set");
    }
  }

  MetaTrainResult out{init ? std::move(*init) : nn::ParameterSet::initialize(dims, config.seed),
                      SignatureBuffer(config.signature_buffer_capacity), {}, {}, 0, 0};
  if (!(out.params.dims() == dims)) throw std::invalid_argument("meta_train: init dims differ");

  std::mt19937_64 order_rng(config.seed);
  const std::size_t per_epoch =
      config.tasks_per_epoch == 0
          ? tasks.size()
          : std::min(tasks.size(), static_cast<std::size_t>(config.tasks_per_epoch));

  nn::AdamState adam(dims);
  nn::ParameterSet best = out.params;
  double best_score = 0.0;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), order_rng);

    for (std::size_t k = 0; k < per_epoch; ++k) {
      const graph::Task& task = tasks[order[k]];
      const std::uint64_t task_seed = mix(config.seed, static_cast<std::uint64_t>(epoch), order[k]);

      agent::TrainConfig inner = train;
      inner.seed = task_seed;
      env::StreamingEnvironment support = make_env(task, env::Phase::kSupport, task_seed);
      const agent::AdaptationResult adapted = agent::adapt_task(out.params, task, inner, support);
      if (!adapted.params.all_finite()) {
        throw std::domain_error("meta_train: adaptation diverged on " + task.network.event_id());
      }

      env::StreamingEnvironment query = make_env(task, env::Phase::kQuery, task_seed + 1);
      const env::Episode episode =
          env::run_episode(query, adapted.params, config.query_epsilon, task_seed + 2,
                           train.encoder);
      MetaEpochRecord rec;
      rec.epoch = epoch;
      rec.task_id = task.network.event_id();
      if (!adapted.log.empty()) {
        rec.inner_actor_loss = adapted.log.back().actor_loss;
        rec.inner_critic_loss = adapted.log.back().critic_loss;
      }
      if (episode.transitions.empty()) {
        out.log.push_back(rec);
        continue;
      }

      const agent::LossContext ctx = agent::loss_context(inner, query);
      SignatureTerm sig{task.network.event_id(),
                        config.use_signature_buffer ? &out.buffer : nullptr,
                        config.use_signature_buffer ? config.signature_lambda : 0.0};
      MetaGradient g = meta_gradient(adapted.params, episode.transitions, ctx, sig);
      if (config.freeze_embeddings_per_task) g.gradient[nn::ParamId::X].setZero();
      if (config.max_grad_norm > 0.0) nn::clip_global_norm(g.gradient, config.max_grad_norm);
      if (config.optimizer == "adam") {
        adam.step(out.params, g.gradient, config.meta_eta);
      } else {
        out.params.axpy(-config.meta_eta, g.gradient);
      }
      if (!out.params.all_finite()) {
        throw std::domain_error("meta_train: meta update diverged on " + task.network.event_id());
      }
      ++instrumentation::counters().gradient_steps;

      rec.meta_actor_loss = g.actor.total;
      rec.meta_critic_loss = g.critic.total;
      rec.mean_signature_divergence = g.actor.divergence;
      out.log.push_back(rec);

      if (config.use_signature_buffer) {
        out.buffer.push(
            nn::compute_signature(adapted.params, ctx.active_viewers, task.network.event_id()));
      }
    }
    out.epochs_run = epoch;

    if (validation) {
      const double score = validation(out.params);
      out.validation.push_back(score);
      if (epoch == 1 || score < best_score) {
        best_score = score;
        best = out.params;
        out.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    } else {
      out.best_epoch = epoch;
    }
  }
  if (validation) out.params = std::move(best);
  return out;
}

void write_meta_log(const std::filesystem::path& file, const std::vector<MetaEpochRecord>& log) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "epoch,task_id,inner_actor_loss,inner_critic_loss,meta_actor_loss,meta_critic_loss,"
         "mean_signature_divergence\n";
  for (const MetaEpochRecord& r : log) {
    out << r.epoch << ',' << r.task_id << ',' << graph::format_double(r.inner_actor_loss) << ','
        << graph::format_double(r.inner_critic_loss) << ','
        << graph::format_double(r.meta_actor_loss) << ','
        << graph::format_double(r.meta_critic_loss) << ','
        << graph::format_double(r.mean_signature_divergence) << '\n';
  }
}

}  // namespace melanie::meta
