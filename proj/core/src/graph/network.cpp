#include "melanie/graph/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace melanie::graph {

TemporalInteractionNetwork::TemporalInteractionNetwork(std::string event_id,
                                                       std::size_t num_viewers,
                                                       std::vector<Interaction> interactions,
                                                       bool normalized,
                                                       std::vector<std::string> original_ids)
    : event_id_(std::move(event_id)),
      num_viewers_(num_viewers),
      interactions_(std::move(interactions)),
      normalized_(normalized),
      original_ids_(std::move(original_ids)) {
  if (num_viewers_ == 0) {
    throw std::invalid_argument("network '" + event_id_ + "': num_viewers must be > 0");
  }
  if (!original_ids_.empty() && original_ids_.size() != num_viewers_) {
    throw std::invalid_argument("network '" + event_id_ +
                                "': id map size does not match num_viewers");
  }
  double last_time = 0.0;
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const Interaction& e = interactions_[i];
    const std::string where = "network '" + event_id_ + "' interaction " + std::to_string(i);
    if (e.source == e.target) throw std::invalid_argument(where + ": self interaction");
    if (e.source >= num_viewers_ || e.target >= num_viewers_) {
      throw std::invalid_argument(where + ": viewer id out of range");
    }
    if (!std::isfinite(e.time) || e.time < 0.0) {
      throw std::invalid_argument(where + ": time must be finite and >= 0");
    }
    if (!std::isfinite(e.throughput) || e.throughput < 0.0) {
      throw std::invalid_argument(where + ": throughput must be finite and >= 0");
    }
    if (normalized_ && e.throughput > 1.0) {
      throw std::invalid_argument(where + ": normalized throughput exceeds 1");
    }
    if (i > 0 && e.time < last_time) {
      throw std::invalid_argument(where + ": interactions are not time ordered");
    }
    last_time = e.time;
  }
}

std::string TemporalInteractionNetwork::original_id(ViewerId dense) const {
  if (dense >= num_viewers_) throw std::out_of_range("dense id out of range");
  if (original_ids_.empty()) return std::to_string(dense);
  return original_ids_[dense];
}

std::vector<ViewerId> TemporalInteractionNetwork::viewers() const {
  std::vector<ViewerId> ids(num_viewers_);
  for (std::size_t i = 0; i < num_viewers_; ++i) ids[i] = static_cast<ViewerId>(i);
  return ids;
}

TemporalInteractionNetwork normalize_throughput(const TemporalInteractionNetwork& network) {
  if (network.normalized()) {
    throw std::invalid_argument("network '" + network.event_id() + "' is already normalized");
  }
  if (network.size() == 0) {
    throw std::invalid_argument("network '" + network.event_id() + "' has no interactions");
  }
  auto [lo_it, hi_it] = std::minmax_element(
      network.interactions().begin(), network.interactions().end(),
      [](const Interaction& a, const Interaction& b) { return a.throughput < b.throughput; });
  const double lo = lo_it->throughput;
  const double hi = hi_it->throughput;
  std::vector<Interaction> scaled(network.interactions().begin(), network.interactions().end());
  for (Interaction& e : scaled) {
    e.throughput = (hi == lo) ? 1.0 : (e.throughput - lo) / (hi - lo);
  }
  return TemporalInteractionNetwork(network.event_id(), network.num_viewers(), std::move(scaled),
                                    true, network.original_ids());
}

Task split_task(const TemporalInteractionNetwork& network, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in (0,1)");
  }
  const std::size_t total = network.size();
  if (total < 2) {
    throw std::invalid_argument("network '" + network.event_id() +
                                "' needs at least 2 interactions to split");
  }
  // The epsilon absorbs products such as 0.7 * 10 = 7.000000000000001.
  const double raw = ratio * static_cast<double>(total);
  auto support = static_cast<std::size_t>(std::ceil(raw - 1e-9 * static_cast<double>(total)));
  support = std::clamp<std::size_t>(support, 1, total - 1);
  return Task{network, IndexRange{0, support}, IndexRange{support, total}, ratio};
}

std::vector<Neighbor> neighborhood(const TemporalInteractionNetwork& network, ViewerId u,
                                   double t) {
  if (u >= network.num_viewers()) {
    throw std::invalid_argument("unknown viewer id " + std::to_string(u));
  }
  NeighborhoodIndex index(network.num_viewers());
  for (const Interaction& e : network.interactions()) {
    if (e.time > t) break;
    if (e.source == u || e.target == u) index.observe(e);
  }
  auto row = index.neighbors(u);
  return {row.begin(), row.end()};
}

NeighborhoodIndex::NeighborhoodIndex(std::size_t num_viewers) : adjacency_(num_viewers) {}

void NeighborhoodIndex::clear() {
  for (auto& row : adjacency_) row.clear();
  observed_ = 0;
}

void NeighborhoodIndex::upsert(std::vector<Neighbor>& row, ViewerId v, double throughput) {
  auto it = std::lower_bound(row.begin(), row.end(), v,
                             [](const Neighbor& n, ViewerId id) { return n.viewer < id; });
  if (it != row.end() && it->viewer == v) {
    it->throughput = throughput;
  } else {
    row.insert(it, Neighbor{v, throughput});
  }
}

void NeighborhoodIndex::observe(const Interaction& e) {
  const std::size_t needed = std::max(e.source, e.target) + std::size_t{1};
  if (needed > adjacency_.size()) adjacency_.resize(needed);
  upsert(adjacency_[e.source], e.target, e.throughput);
  upsert(adjacency_[e.target], e.source, e.throughput);
  ++observed_;
}

std::span<const Neighbor> NeighborhoodIndex::neighbors(ViewerId u) const {
  if (u >= adjacency_.size()) return {};
  return adjacency_[u];
}

}  // namespace melanie::graph
