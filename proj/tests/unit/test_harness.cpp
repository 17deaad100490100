#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "melanie/harness/config.hpp"
#include "melanie/harness/evaluation.hpp"
#include "melanie/harness/experiment.hpp"
#include "melanie/harness/metrics.hpp"
#include "melanie/instrumentation.hpp"

using namespace melanie;
using harness::Prediction;

namespace {

harness::RunConfig tiny_run(const std::string& variant) {
  harness::RunConfig c = harness::parse_run_config(R"({
    "dims": {"embedding": 4, "state": 4, "max_viewers": 8, "hidden": 8},
    "train": {"K": 8, "adaptation_steps": 2},
    "meta": {"epochs": 2},
    "env": {"mode": "replay"},
    "data": {"num_events": 4, "train_events": 2, "validation_events": 1, "test_events": 1,
             "synthetic": {"num_offices": 2, "viewers_per_office": 4,
                           "duration_minutes": 5, "interactions_per_minute": 8}}
  })");
  c.variant = harness::variant_from_name(variant);
  return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Metrics, HandExample) {
  const std::vector<Prediction> p{{0.6, 1.0}, {0.0, 0.0}};
  EXPECT_NEAR(harness::mse(p), 0.08, 1e-15);
  EXPECT_NEAR(harness::rmse(p), std::sqrt(0.08), 1e-15);
  EXPECT_NEAR(harness::rmse(p), 0.2828, 5e-5);
  EXPECT_NEAR(harness::mae(p), 0.2, 1e-15);
  EXPECT_THROW(harness::mse({}), std::invalid_argument);
  EXPECT_THROW(harness::mae({}), std::invalid_argument);
}

TEST(Metrics, RandomSetsAgreeWithDirectSums) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Prediction> p(1 + rng() % 50);
    for (auto& x : p) x = {u(rng), u(rng)};
    long double se = 0.0L;
    long double ae = 0.0L;
    for (const auto& x : p) {
      se += static_cast<long double>(x.q - x.r) * (x.q - x.r);
      ae += std::abs(static_cast<long double>(x.q - x.r));
    }
    const auto n = static_cast<long double>(p.size());
    EXPECT_NEAR(harness::mse(p), static_cast<double>(se / n), 1e-9);
    EXPECT_NEAR(harness::mae(p), static_cast<double>(ae / n), 1e-9);
    EXPECT_EQ(harness::rmse(p), std::sqrt(harness::mse(p)));
    EXPECT_LE(harness::mae(p), harness::rmse(p) + 1e-15);
  }
}

TEST(Metrics, RewardCurveDividesByViewerCount) {
  const std::vector<env::MinuteReward> minutes{{0, 3.0, 4}, {1, 0.0, 0}, {2, 1.2, 2}};
  const auto curve = harness::average_reward_curve(minutes, 2);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].minute, 0);
  EXPECT_DOUBLE_EQ(curve[0].reward, 1.5);
  EXPECT_EQ(curve[1].minute, 2);
  EXPECT_DOUBLE_EQ(curve[1].reward, 0.6);
  EXPECT_THROW(harness::average_reward_curve(minutes, 0), std::invalid_argument);
}

TEST(Config, DefaultsRoundTrip) {
  const harness::RunConfig c = harness::parse_run_config("{}");
  EXPECT_EQ(c.dims, nn::NetworkDims{});
  EXPECT_EQ(c.variant.name, "MELANIE");
  const harness::RunConfig back = harness::parse_run_config(harness::to_json(c));
  EXPECT_EQ(harness::to_json(back), harness::to_json(c));
}

TEST(Config, ErrorsNameTheKey) {
  auto message = [](const std::string& text) {
    try {
      harness::parse_run_config(text);
    } catch (const std::invalid_argument& ex) {
      return std::string(ex.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"train": {"K": 0}})").find("train.K"), std::string::npos);
  EXPECT_NE(message(R"({"train": {"bogus": 1}})").find("train.bogus"), std::string::npos);
  EXPECT_NE(message(R"({"variant": "MELANIE-X"})").find("variant"), std::string::npos);
  EXPECT_NE(message(R"({"meta": {"meta_eta": "fast"}})").find("meta.meta_eta"),
            std::string::npos);
}

TEST(Config, OverridesSetDottedKeys) {
  harness::RunConfig c;
  harness::apply_override(c, "train.eta", "0.25");
  harness::apply_override(c, "variant", "MELANIE-T");
  harness::apply_override(c, "data.synthetic.num_offices", "3");
  harness::apply_override(c, "seeds", "[4,5]");
  EXPECT_DOUBLE_EQ(c.train.eta, 0.25);
  EXPECT_EQ(c.variant, harness::variant_from_name("MELANIE-T"));
  EXPECT_EQ(c.data.synthetic.num_offices, 3);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_THROW(harness::apply_override(c, "train.nope", "1"), std::invalid_argument);
}

TEST(Variants, FlagsPerName) {
  EXPECT_TRUE(harness::variant_from_name("MELANIE").use_signature_buffer);
  EXPECT_FALSE(harness::variant_from_name("MELANIE-M").use_signature_buffer);
  EXPECT_FALSE(harness::variant_from_name("MELANIE-B").use_meta);
  EXPECT_TRUE(harness::variant_from_name("MELANIE-B").use_kl_priority);
  EXPECT_FALSE(harness::variant_from_name("MELANIE-T").use_kl_priority);
  EXPECT_EQ(harness::variant_names().size(), 4u);
}

TEST(Dataset, SplitsEventsInOrder) {
  const auto c = tiny_run("MELANIE");
  const auto d = harness::build_dataset(c);
  ASSERT_EQ(d.train.size(), 2u);
  ASSERT_EQ(d.validation.size(), 1u);
  ASSERT_EQ(d.test.size(), 1u);
  EXPECT_TRUE(d.train[0].network.normalized());
  auto g = c;
  g.env.mode = env::Mode::kGenerative;
  EXPECT_FALSE(harness::build_dataset(g).test[0].network.normalized());
}

TEST(Experiment, SummaryIsSeedMean) {
  auto c = tiny_run("MELANIE-B");
  c.seeds = {1, 2, 3};
  const auto s = harness::run_experiment(c, false);
  ASSERT_EQ(s.seeds.size(), 3u);
  double sum = 0.0;
  for (const auto& r : s.seeds) {
    double per_event = 0.0;
    for (const auto& rep : r.reports) per_event += rep.rmse;
    EXPECT_NEAR(r.rmse, per_event / static_cast<double>(r.reports.size()), 1e-15);
    sum += r.rmse;
  }
  EXPECT_NEAR(s.rmse_mean, sum / 3.0, 1e-15);
  double var = 0.0;
  for (const auto& r : s.seeds) var += (r.rmse - s.rmse_mean) * (r.rmse - s.rmse_mean);
  EXPECT_NEAR(s.rmse_std, std::sqrt(var / 2.0), 1e-12);
}

TEST(Experiment, TabularVariantSkipsMetaMachinery) {
  auto c = tiny_run("MELANIE-T");
  c.out = fresh_dir("melanie-harness-t");
  instrumentation::reset();
  harness::run_experiment(c, true);
  const auto counts = instrumentation::snapshot();
  EXPECT_EQ(counts.meta_loss_evaluations, 0u);
  EXPECT_EQ(counts.kl_priorities, 0u);
  EXPECT_EQ(counts.signature_divergences, 0u);
  EXPECT_GT(counts.gradient_steps, 0u);
  const auto root = c.out / c.name / "1";
  EXPECT_FALSE(std::filesystem::exists(root / "checkpoints" / "signature_buffer.json"));
  EXPECT_TRUE(std::filesystem::exists(root / "checkpoints" / "global.json"));
  EXPECT_TRUE(std::filesystem::exists(c.out / c.name / "summary.json"));
  std::filesystem::remove_all(c.out);
}

TEST(Experiment, FullVariantWritesArtifactsAndResidualsReproduceRmse) {
  auto c = tiny_run("MELANIE");
  c.out = fresh_dir("melanie-harness-full");
  instrumentation::reset();
  const auto s = harness::run_experiment(c, true);
  EXPECT_GT(instrumentation::snapshot().meta_loss_evaluations, 0u);
  const auto root = c.out / c.name / "1";
  EXPECT_TRUE(std::filesystem::exists(root / "checkpoints" / "signature_buffer.json"));
  EXPECT_TRUE(std::filesystem::exists(root / "logs" / "meta_train.csv"));

  const auto& report = s.seeds.at(0).reports.at(0);
  std::ifstream in(root / "reports" / (report.event_id + ".residuals.csv"));
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "q,r");
  double se = 0.0;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string q, r;
    std::getline(row, q, ',');
    std::getline(row, r);
    const double d = std::stod(q) - std::stod(r);
    se += d * d;
    ++n;
  }
  EXPECT_EQ(n, report.num_query_interactions);
  EXPECT_NEAR(std::sqrt(se / static_cast<double>(n)), report.rmse, 1e-9);
  std::filesystem::remove_all(c.out);
}
