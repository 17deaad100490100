#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <unordered_map>
#include <vector>

#include "melanie/graph/network.hpp"
#include "melanie/nn/autodiff.hpp"

namespace melanie::agent {

using graph::Neighbor;
using graph::ViewerId;

// One tracker decision. The neighborhood snapshots let losses re-encode the
// state under the current parameters.
struct Transition {
  ViewerId viewer{0};
  std::vector<Neighbor> neighbors;       // observed before acting
  std::vector<Neighbor> next_neighbors;  // observed after the step
  nn::Vector state;                      // d_s encoding at decision time
  nn::Vector action;                     // full actor distribution (length M)
  ViewerId chosen{0};
  std::size_t event_viewers{0};          // selectable ids are [0, event_viewers) minus viewer
  double reward{0.0};                    // in [0,1]
  int minute{0};
  double priority{0.0};                  // frozen at push time
  std::uint64_t sequence{0};             // push order, larger is newer
};

// Equal-width partition of [0,1] with Laplace smoothing. The top bin is
// right-closed so a reward of exactly 1.0 lands in it.
class ThroughputHistogram {
 public:
  explicit ThroughputHistogram(std::size_t bins = 10, double laplace_alpha = 1.0);

  void add(double reward);
  void clear();

  std::size_t bin_count() const noexcept { return counts_.size(); }
  double laplace_alpha() const noexcept { return alpha_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t count(std::size_t bin) const { return counts_.at(bin); }
  std::size_t bin_of(double reward) const;

  // (count + alpha) / (total + alpha * bins)
  double probability(std::size_t bin) const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_{0};
  double alpha_;
};

// KL(p || q) of the smoothed distributions, natural log. Throws when the
// binning or smoothing differs.
double kl_divergence(const ThroughputHistogram& p, const ThroughputHistogram& q);

/*
 * Ring of the D most recent transitions plus per-viewer reward histograms
 * for the current and previous minute.
 *
 * With KL priorities enabled, push() stores KL(current || previous) of the
 * transition's viewer as its priority. Without them, priority is 0 and no
 * divergence is computed.
 */
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity, std::size_t bins = 10, double laplace_alpha = 1.0,
                        bool use_kl_priority = true);

  // Minute must not move backwards for a viewer. A later minute rolls the
  // current histogram into the previous slot.
  void record_reward(ViewerId viewer, double reward, int minute);

  // The viewer must have recorded at least one reward.
  void push(Transition transition);

  // The min(k, size) highest-priority transitions, newest first among ties.
  std::vector<Transition> sample_top_k(std::size_t k) const;
  // min(k, size) distinct transitions drawn uniformly.
  std::vector<Transition> sample_uniform(std::size_t k, std::mt19937_64& rng) const;

  std::size_t size() const noexcept { return ring_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return ring_.empty(); }
  bool use_kl_priority() const noexcept { return use_kl_priority_; }
  const Transition& at(std::size_t i) const { return ring_.at(i); }  // 0 is oldest
  double mean_priority() const;

  // KL(current || previous) for the viewer right now.
  double viewer_priority(ViewerId viewer) const;
  const ThroughputHistogram& current_histogram(ViewerId viewer) const;
  const ThroughputHistogram& previous_histogram(ViewerId viewer) const;

 private:
  struct ViewerHistograms {
    ThroughputHistogram current;
    ThroughputHistogram previous;
    int minute;
  };

  const ViewerHistograms& histograms(ViewerId viewer) const;

  std::size_t capacity_;
  std::size_t bins_;
  double alpha_;
  bool use_kl_priority_;
  std::deque<Transition> ring_;
  std::unordered_map<ViewerId, ViewerHistograms> viewers_;
  std::uint64_t next_sequence_{0};
};

}  // namespace melanie::agent
