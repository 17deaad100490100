#include "melanie/harness/evaluation.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "melanie/env/episode.hpp"
#include "melanie/graph/io.hpp"

namespace melanie::harness {

EvalReport evaluate(const nn::ParameterSet& params, env::StreamingEnvironment& env,
                    const nn::EncoderOptions& encoder, std::uint64_t seed) {
  const env::Episode episode = env::run_episode(env, params, 0.0, seed, encoder);
  if (episode.transitions.empty()) {
    throw std::invalid_argument("evaluate: no query interactions for " + env.event_id());
  }
  EvalReport out;
  out.event_id = env.event_id();
  out.num_query_interactions = episode.transitions.size();
  const graph::LinkModel* link = env.link_model();
  std::size_t intra = 0;
  double reward_sum = 0.0;
  for (const agent::Transition& t : episode.transitions) {
    out.residuals.push_back({nn::critic_forward(params, t.state, t.action), t.reward});
    reward_sum += t.reward;
    if (link && link->same_office(t.viewer, t.chosen)) ++intra;
  }
  const auto n = static_cast<double>(episode.transitions.size());
  out.mse = mse(out.residuals);
  out.rmse = rmse(out.residuals);
  out.mae = mae(out.residuals);
  out.mean_reward = reward_sum / n;
  out.intra_office_rate = static_cast<double>(intra) / n;
  out.reward_curve = average_reward_curve(episode.minutes, static_cast<int>(env.num_viewers()));
  return out;
}

void write_residuals_csv(const std::filesystem::path& file, const EvalReport& report) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "q,r\n";
  for (const Prediction& p : report.residuals) {
    out << graph::format_double(p.q) << ',' << graph::format_double(p.r) << '\n';
  }
}

void write_reward_curve_csv(const std::filesystem::path& file,
                            const std::vector<CurvePoint>& curve) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "minute,average_reward\n";
  for (const CurvePoint& c : curve) out << c.minute << ',' << graph::format_double(c.reward) << '\n';
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json doc;
  doc["event_id"] = r.event_id;
  doc["rmse"] = r.rmse;
  doc["mae"] = r.mae;
  doc["mse"] = r.mse;
  doc["num_query_interactions"] = r.num_query_interactions;
  doc["mean_reward"] = r.mean_reward;
  doc["intra_office_rate"] = r.intra_office_rate;
  return doc.dump(2);
}

}  // namespace melanie::harness
