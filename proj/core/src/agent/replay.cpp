#include "melanie/agent/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "melanie/instrumentation.hpp"

namespace melanie::agent {

ThroughputHistogram::ThroughputHistogram(std::size_t bins, double laplace_alpha)
    : counts_(bins, 0), alpha_(laplace_alpha) {
  if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
  if (!(laplace_alpha > 0.0)) throw std::invalid_argument("laplace_alpha must be > 0");
}

std::size_t ThroughputHistogram::bin_of(double reward) const {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw std::invalid_argument("reward " + std::to_string(reward) + " outside [0,1]");
  }
  const auto bins = counts_.size();
  const auto bin = static_cast<std::size_t>(reward * static_cast<double>(bins));
  return std::min(bin, bins - 1);
}

void ThroughputHistogram::add(double reward) {
  ++counts_[bin_of(reward)];
  ++total_;
}

void ThroughputHistogram::clear() {
  std::fill(counts_.begin(), counts_.end(), 0);
  total_ = 0;
}

double ThroughputHistogram::probability(std::size_t bin) const {
  const double denom = static_cast<double>(total_) + alpha_ * static_cast<double>(counts_.size());
  return (static_cast<double>(counts_.at(bin)) + alpha_) / denom;
}

double kl_divergence(const ThroughputHistogram& p, const ThroughputHistogram& q) {
  if (p.bin_count() != q.bin_count() || p.laplace_alpha() != q.laplace_alpha()) {
    throw std::invalid_argument("kl_divergence: histograms use different binning");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.bin_count(); ++i) {
    const double pi = p.probability(i);
    kl += pi * std::log(pi / q.probability(i));
  }
  // Rounding can leave a tiny negative value for near-identical inputs.
  return std::max(0.0, kl);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t bins, double laplace_alpha,
                           bool use_kl_priority)
    : capacity_(capacity), bins_(bins), alpha_(laplace_alpha), use_kl_priority_(use_kl_priority) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be > 0");
  ThroughputHistogram probe(bins, laplace_alpha);  // validates binning
  (void)probe;
}

void ReplayBuffer::record_reward(ViewerId viewer, double reward, int minute) {
  auto it = viewers_.find(viewer);
  if (it == viewers_.end()) {
    it = viewers_
             .emplace(viewer, ViewerHistograms{ThroughputHistogram(bins_, alpha_),
                                               ThroughputHistogram(bins_, alpha_), minute})
             .first;
  }
  ViewerHistograms& h = it->second;
  if (minute < h.minute) {
    throw std::invalid_argument("record_reward: minute moved backwards for viewer " +
                                std::to_string(viewer));
  }
  if (minute > h.minute) {
    h.previous = h.current;
    h.current.clear();
    h.minute = minute;
  }
  h.current.add(reward);
}

const ReplayBuffer::ViewerHistograms& ReplayBuffer::histograms(ViewerId viewer) const {
  auto it = viewers_.find(viewer);
  if (it == viewers_.end()) {
    throw std::invalid_argument("no reward histogram for viewer " + std::to_string(viewer));
  }
  return it->second;
}

double ReplayBuffer::viewer_priority(ViewerId viewer) const {
  const ViewerHistograms& h = histograms(viewer);
  ++instrumentation::counters().kl_priorities;
  return kl_divergence(h.current, h.previous);
}

const ThroughputHistogram& ReplayBuffer::current_histogram(ViewerId viewer) const {
  return histograms(viewer).current;
}

const ThroughputHistogram& ReplayBuffer::previous_histogram(ViewerId viewer) const {
  return histograms(viewer).previous;
}

void ReplayBuffer::push(Transition transition) {
  const ViewerHistograms& h = histograms(transition.viewer);
  (void)h;
  transition.priority = use_kl_priority_ ? viewer_priority(transition.viewer) : 0.0;
  transition.sequence = next_sequence_++;
  if (ring_.size() == capacity_) ring_.pop_front();
  ring_.push_back(std::move(transition));
}

std::vector<Transition> ReplayBuffer::sample_top_k(std::size_t k) const {
  if (k < 1) throw std::invalid_argument("sample_top_k: K must be >= 1");
  if (ring_.empty()) throw std::invalid_argument("sample_top_k: buffer is empty");
  std::vector<std::size_t> order(ring_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [this](std::size_t a, std::size_t b) {
                      const Transition& x = ring_[a];
                      const Transition& y = ring_[b];
                      if (x.priority != y.priority) return x.priority > y.priority;
                      return x.sequence > y.sequence;
                    });
  std::vector<Transition> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(ring_[order[i]]);
  return out;
}

std::vector<Transition> ReplayBuffer::sample_uniform(std::size_t k, std::mt19937_64& rng) const {
  if (k < 1) throw std::invalid_argument("sample_uniform: K must be >= 1");
  if (ring_.empty()) throw std::invalid_argument("sample_uniform: buffer is empty");
  std::vector<std::size_t> order(ring_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Transition> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(ring_[order[i]]);
  return out;
}

double ReplayBuffer::mean_priority() const {
  if (ring_.empty()) return 0.0;
  double s = 0.0;
  for (const Transition& t : ring_) s += t.priority;
  return s / static_cast<double>(ring_.size());
}

}  // namespace melanie::agent
