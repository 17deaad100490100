#include "melanie/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace melanie::harness {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

// Reads the keys of one JSON object, remembering which were consumed.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) key_error(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& dst) {
    known_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const json::exception& ex) {
      key_error(path(key), ex.what());
    }
  }

  const json* child(const std::string& key) {
    known_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        key_error(path(key), "unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string> known_;
};

env::Mode mode_from_name(const std::string& name) {
  if (name == "replay") return env::Mode::kReplay;
  if (name == "generative") return env::Mode::kGenerative;
  key_error("env.mode", "expected 'replay' or 'generative', got '" + name + "'");
}

std::string mode_name(env::Mode mode) {
  return mode == env::Mode::kReplay ? "replay" : "generative";
}

void read_dims(const json& j, nn::NetworkDims& d) {
  Section s(j, "dims");
  s.read("embedding", d.embedding);
  s.read("state", d.state);
  s.read("max_viewers", d.max_viewers);
  s.read("hidden", d.hidden);
  s.reject_unknown();
}

void read_train(const json& j, agent::TrainConfig& t) {
  Section s(j, "train");
  s.read("eta", t.eta);
  s.read("gamma", t.gamma);
  s.read("epsilon_start", t.epsilon_start);
  s.read("epsilon_end", t.epsilon_end);
  s.read("epsilon_decay", t.epsilon_decay);
  s.read("K", t.K);
  s.read("replay_capacity", t.replay_capacity);
  s.read("adaptation_steps", t.adaptation_steps);
  s.read("update_every_minutes", t.update_every_minutes);
  s.read("seed", t.seed);
  s.read("use_kl_priority", t.use_kl_priority);
  s.read("bootstrap", t.bootstrap);
  s.read("histogram_bins", t.histogram_bins);
  s.read("laplace_alpha", t.laplace_alpha);
  s.read("max_grad_norm", t.max_grad_norm);
  s.read("literal_eq1", t.encoder.literal_eq1);
  s.reject_unknown();
}

void read_meta(const json& j, meta::MetaConfig& m) {
  Section s(j, "meta");
  s.read("meta_eta", m.meta_eta);
  s.read("signature_lambda", m.signature_lambda);
  s.read("epochs", m.epochs);
  s.read("tasks_per_epoch", m.tasks_per_epoch);
  s.read("signature_buffer_capacity", m.signature_buffer_capacity);
  s.read("query_epsilon", m.query_epsilon);
  s.read("patience", m.patience);
  s.read("max_grad_norm", m.max_grad_norm);
  s.read("optimizer", m.optimizer);
  s.read("freeze_embeddings_per_task", m.freeze_embeddings_per_task);
  s.reject_unknown();
}

void read_data(const json& j, DataConfig& d) {
  Section s(j, "data");
  s.read("source", d.source);
  std::string dir = d.directory.string();
  s.read("directory", dir);
  d.directory = dir;
  if (const json* syn = s.child("synthetic")) {
    try {
      d.synthetic = graph::parse_synthetic_config(syn->dump());
    } catch (const std::exception& ex) {
      key_error("data.synthetic", ex.what());
    }
  }
  s.read("num_events", d.num_events);
  s.read("event_seed", d.event_seed);
  s.read("train_events", d.train_events);
  s.read("validation_events", d.validation_events);
  s.read("test_events", d.test_events);
  s.read("split_ratio", d.split_ratio);
  s.reject_unknown();
}

ordered_json to_ordered(const RunConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["seeds"] = c.seeds;
  j["out"] = c.out.string();
  j["dims"] = {{"embedding", c.dims.embedding},
               {"state", c.dims.state},
               {"max_viewers", c.dims.max_viewers},
               {"hidden", c.dims.hidden}};
  const agent::TrainConfig& t = c.train;
  ordered_json train;
  train["eta"] = t.eta;
  train["gamma"] = t.gamma;
  train["epsilon_start"] = t.epsilon_start;
  train["epsilon_end"] = t.epsilon_end;
  train["epsilon_decay"] = t.epsilon_decay;
  train["K"] = t.K;
  train["replay_capacity"] = t.replay_capacity;
  train["adaptation_steps"] = t.adaptation_steps;
  train["update_every_minutes"] = t.update_every_minutes;
  train["seed"] = t.seed;
  train["use_kl_priority"] = t.use_kl_priority;
  train["bootstrap"] = t.bootstrap;
  train["histogram_bins"] = t.histogram_bins;
  train["laplace_alpha"] = t.laplace_alpha;
  train["max_grad_norm"] = t.max_grad_norm;
  train["literal_eq1"] = t.encoder.literal_eq1;
  j["train"] = train;
  const meta::MetaConfig& m = c.meta;
  ordered_json meta;
  meta["meta_eta"] = m.meta_eta;
  meta["signature_lambda"] = m.signature_lambda;
  meta["epochs"] = m.epochs;
  meta["tasks_per_epoch"] = m.tasks_per_epoch;
  meta["signature_buffer_capacity"] = m.signature_buffer_capacity;
  meta["query_epsilon"] = m.query_epsilon;
  meta["patience"] = m.patience;
  meta["max_grad_norm"] = m.max_grad_norm;
  meta["optimizer"] = m.optimizer;
  meta["freeze_embeddings_per_task"] = m.freeze_embeddings_per_task;
  j["meta"] = meta;
  j["env"] = {{"mode", mode_name(c.env.mode)}};
  ordered_json data;
  data["source"] = c.data.source;
  data["directory"] = c.data.directory.string();
  data["synthetic"] = ordered_json::parse(graph::to_json(c.data.synthetic));
  data["num_events"] = c.data.num_events;
  data["event_seed"] = c.data.event_seed;
  data["train_events"] = c.data.train_events;
  data["validation_events"] = c.data.validation_events;
  data["test_events"] = c.data.test_events;
  data["split_ratio"] = c.data.split_ratio;
  j["data"] = data;
  j["variant"] = c.variant.name;
  return j;
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  root.read("name", c.name);
  root.read("seeds", c.seeds);
  std::string out = c.out.string();
  root.read("out", out);
  c.out = out;
  if (const json* j = root.child("dims")) read_dims(*j, c.dims);
  if (const json* j = root.child("train")) read_train(*j, c.train);
  if (const json* j = root.child("meta")) read_meta(*j, c.meta);
  if (const json* j = root.child("env")) {
    Section s(*j, "env");
    std::string mode = mode_name(c.env.mode);
    s.read("mode", mode);
    s.reject_unknown();
    c.env.mode = mode_from_name(mode);
  }
  if (const json* j = root.child("data")) read_data(*j, c.data);
  std::string variant = c.variant.name;
  root.read("variant", variant);
  root.reject_unknown();
  try {
    c.variant = variant_from_name(variant);
  } catch (const std::invalid_argument& ex) {
    key_error("variant", ex.what());
  }
  validate(c);
  return c;
}

void collect_keys(const ordered_json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      collect_keys(value, path, out);
    } else {
      out.push_back(path);
    }
  }
}

}  // namespace

VariantSpec variant_from_name(std::string_view name) {
  if (name == "MELANIE") return {"MELANIE", true, true, true};
  if (name == "MELANIE-M") return {"MELANIE-M", true, false, true};
  if (name == "MELANIE-B") return {"MELANIE-B", false, false, true};
  if (name == "MELANIE-T") return {"MELANIE-T", false, false, false};
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "' (expected MELANIE, MELANIE-M, MELANIE-B or MELANIE-T)");
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{"MELANIE", "MELANIE-M", "MELANIE-B", "MELANIE-T"};
  return names;
}

void validate(const RunConfig& c) {
  auto wrap = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& ex) {
      key_error(key, ex.what());
    }
  };
  if (c.name.empty()) key_error("name", "must not be empty");
  if (c.seeds.empty()) key_error("seeds", "need at least one seed");
  wrap("dims", [&] { nn::validate(c.dims); });
  wrap("train", [&] { agent::validate(c.train); });
  wrap("meta", [&] { meta::validate(c.meta); });
  wrap("data.synthetic", [&] { graph::validate(c.data.synthetic); });
  const DataConfig& d = c.data;
  if (d.source != "synthetic" && d.source != "directory") {
    key_error("data.source", "expected 'synthetic' or 'directory', got '" + d.source + "'");
  }
  if (d.source == "directory" && d.directory.empty()) key_error("data.directory", "missing path");
  if (d.source == "directory" && c.env.mode == env::Mode::kGenerative) {
    key_error("env.mode", "generative mode needs synthetic data");
  }
  if (d.train_events < 1) key_error("data.train_events", "must be >= 1");
  if (d.validation_events < 0) key_error("data.validation_events", "must be >= 0");
  if (d.test_events < 1) key_error("data.test_events", "must be >= 1");
  if (d.source == "synthetic" && d.num_events < d.train_events + d.validation_events + d.test_events) {
    key_error("data.num_events", "smaller than train + validation + test events");
  }
  if (!(d.split_ratio > 0.0 && d.split_ratio < 1.0)) key_error("data.split_ratio", "must be in (0,1)");
  if (d.source == "synthetic" && d.synthetic.num_viewers() > c.dims.max_viewers) {
    key_error("dims.max_viewers", "smaller than the synthetic viewer count");
  }
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + ex.what());
  }
  return from_json(doc);
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_json(const RunConfig& config) { return to_ordered(config).dump(2); }

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  json doc = json::parse(to_ordered(config).dump());
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) key_error(key, "unknown key");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) key_error(key, "is a section, not a value");
  *node = parsed;
  config = from_json(doc);
}

std::vector<std::string> config_keys(const RunConfig& config, const std::string& section) {
  const ordered_json doc = to_ordered(config);
  std::vector<std::string> out;
  if (section.empty()) {
    collect_keys(doc, "", out);
  } else if (doc.contains(section) && doc[section].is_object()) {
    collect_keys(doc[section], section, out);
  }
  return out;
}

}  // namespace melanie::harness
