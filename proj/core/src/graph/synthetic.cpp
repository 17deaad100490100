#include "melanie/graph/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace melanie::graph {

void validate(const SyntheticEventConfig& c) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("synthetic config: " + what);
  };
  if (c.num_offices < 1) fail("num_offices must be >= 1");
  if (c.viewers_per_office < 1) fail("viewers_per_office must be >= 1");
  if (c.num_viewers() < 2) fail("need at least 2 viewers");
  if (!(c.cdn_bandwidth > 0.0)) fail("cdn_bandwidth must be > 0");
  if (!(c.intra_office_bandwidth > c.inter_office_bandwidth &&
        c.inter_office_bandwidth > c.cdn_bandwidth)) {
    fail("bandwidths must satisfy intra > inter > cdn");
  }
  if (!(c.throughput_noise_std >= 0.0)) fail("throughput_noise_std must be >= 0");
  if (c.duration_minutes < 1) fail("duration_minutes must be >= 1");
  if (c.interactions_per_minute < 1) fail("interactions_per_minute must be >= 1");
  if (!(c.intra_office_affinity >= 0.0 && c.intra_office_affinity <= 1.0)) {
    fail("intra_office_affinity must be in [0,1]");
  }
}

SyntheticEventConfig parse_synthetic_config(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("synthetic config must be a JSON object");
  SyntheticEventConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "num_offices") c.num_offices = value.get<int>();
    else if (key == "viewers_per_office") c.viewers_per_office = value.get<int>();
    else if (key == "intra_office_bandwidth") c.intra_office_bandwidth = value.get<double>();
    else if (key == "inter_office_bandwidth") c.inter_office_bandwidth = value.get<double>();
    else if (key == "cdn_bandwidth") c.cdn_bandwidth = value.get<double>();
    else if (key == "throughput_noise_std") c.throughput_noise_std = value.get<double>();
    else if (key == "duration_minutes") c.duration_minutes = value.get<int>();
    else if (key == "interactions_per_minute") c.interactions_per_minute = value.get<int>();
    else if (key == "intra_office_affinity") c.intra_office_affinity = value.get<double>();
    else if (key == "office_assignment_seed") c.office_assignment_seed = value.get<std::uint64_t>();
    else throw std::invalid_argument("synthetic config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

SyntheticEventConfig load_synthetic_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_synthetic_config(buf.str());
}

std::string to_json(const SyntheticEventConfig& c) {
  nlohmann::ordered_json j;
  j["num_offices"] = c.num_offices;
  j["viewers_per_office"] = c.viewers_per_office;
  j["intra_office_bandwidth"] = c.intra_office_bandwidth;
  j["inter_office_bandwidth"] = c.inter_office_bandwidth;
  j["cdn_bandwidth"] = c.cdn_bandwidth;
  j["throughput_noise_std"] = c.throughput_noise_std;
  j["duration_minutes"] = c.duration_minutes;
  j["interactions_per_minute"] = c.interactions_per_minute;
  j["intra_office_affinity"] = c.intra_office_affinity;
  j["office_assignment_seed"] = c.office_assignment_seed;
  return j.dump(2);
}

LinkModel::LinkModel(SyntheticEventConfig config) : config_(config) {
  validate(config_);
  const int n = config_.num_viewers();
  office_.resize(static_cast<std::size_t>(n));
  std::vector<int> slots(static_cast<std::size_t>(n));
  std::iota(slots.begin(), slots.end(), 0);
  std::mt19937_64 rng(config_.office_assignment_seed);
  std::shuffle(slots.begin(), slots.end(), rng);
  for (int i = 0; i < n; ++i) office_[static_cast<std::size_t>(slots[i])] = i / config_.viewers_per_office;
}

int LinkModel::office_of(ViewerId v) const {
  if (v >= office_.size()) throw std::invalid_argument("viewer outside synthetic topology");
  return office_[v];
}

double LinkModel::capacity(ViewerId u, ViewerId v) const {
  return same_office(u, v) ? config_.intra_office_bandwidth : config_.inter_office_bandwidth;
}

double LinkModel::sample_throughput(ViewerId u, ViewerId v, std::mt19937_64& rng) const {
  const double cap = capacity(u, v);
  std::normal_distribution<double> noise(0.0, 1.0);
  return std::max(0.0, cap * (1.0 + config_.throughput_noise_std * noise(rng)));
}

double LinkModel::normalize(double mbps) const {
  const double lo = config_.cdn_bandwidth;
  const double hi = config_.intra_office_bandwidth * (1.0 + 3.0 * config_.throughput_noise_std);
  return std::clamp((mbps - lo) / (hi - lo), 0.0, 1.0);
}

TemporalInteractionNetwork generate_synthetic_event(const SyntheticEventConfig& config,
                                                    std::uint64_t seed, std::string event_id) {
  const LinkModel links(config);
  const auto n = static_cast<ViewerId>(config.num_viewers());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<ViewerId> pick_source(0, n - 1);
  std::uniform_int_distribution<ViewerId> pick_other(0, n - 2);
  std::uniform_real_distribution<double> offset(0.0, 60.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<std::vector<ViewerId>> members(static_cast<std::size_t>(config.num_offices));
  for (ViewerId v = 0; v < n; ++v) members[static_cast<std::size_t>(links.office_of(v))].push_back(v);

  std::vector<Interaction> interactions;
  interactions.reserve(static_cast<std::size_t>(config.duration_minutes) *
                       static_cast<std::size_t>(config.interactions_per_minute));
  std::vector<Interaction> minute;
  for (int m = 0; m < config.duration_minutes; ++m) {
    minute.clear();
    for (int k = 0; k < config.interactions_per_minute; ++k) {
      const ViewerId u = pick_source(rng);
      const auto& office = members[static_cast<std::size_t>(links.office_of(u))];
      ViewerId v = 0;
      if (office.size() > 1 && coin(rng) < config.intra_office_affinity) {
        std::uniform_int_distribution<std::size_t> pick_mate(0, office.size() - 2);
        const std::size_t self = static_cast<std::size_t>(
            std::find(office.begin(), office.end(), u) - office.begin());
        std::size_t k = pick_mate(rng);
        if (k >= self) ++k;
        v = office[k];
      } else {
        v = pick_other(rng);
        if (v >= u) ++v;
      }
      const double t = 60.0 * m + offset(rng);
      minute.push_back(Interaction{u, v, t, links.sample_throughput(u, v, rng)});
    }
    std::stable_sort(minute.begin(), minute.end(),
                     [](const Interaction& a, const Interaction& b) { return a.time < b.time; });
    interactions.insert(interactions.end(), minute.begin(), minute.end());
  }
  if (event_id.empty()) event_id = "synthetic-" + std::to_string(seed);
  return TemporalInteractionNetwork(std::move(event_id), n, std::move(interactions));
}

}  // namespace melanie::graph
