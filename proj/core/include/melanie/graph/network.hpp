#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace melanie::graph {

using ViewerId = std::uint32_t;

// One timestamped, throughput-weighted viewer-to-viewer connection.
struct Interaction {
  ViewerId source{0};
  ViewerId target{0};
  double time{0.0};        // event-relative seconds
  double throughput{0.0};  // Mbps when raw, [0,1] when normalized

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct Neighbor {
  ViewerId viewer{0};
  double throughput{0.0};

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/*
 * Ordered sequence of interactions for one streaming event.
 *
 * Immutable after construction. The constructor validates every interaction
 * (no self loops, non-negative finite time and throughput, ids below
 * num_viewers, non-decreasing time, throughput <= 1 when normalized) and
 * throws std::invalid_argument on the first violation.
 */
class TemporalInteractionNetwork {
 public:
  TemporalInteractionNetwork(std::string event_id, std::size_t num_viewers,
                             std::vector<Interaction> interactions,
                             bool normalized = false,
                             std::vector<std::string> original_ids = {});

  const std::string& event_id() const noexcept { return event_id_; }
  std::size_t num_viewers() const noexcept { return num_viewers_; }
  std::size_t size() const noexcept { return interactions_.size(); }
  bool normalized() const noexcept { return normalized_; }

  std::span<const Interaction> interactions() const noexcept { return interactions_; }
  const Interaction& operator[](std::size_t i) const { return interactions_[i]; }

  // Original id of each dense id; empty when ids were dense from the start.
  const std::vector<std::string>& original_ids() const noexcept { return original_ids_; }
  std::string original_id(ViewerId dense) const;

  // Viewers 0..num_viewers-1.
  std::vector<ViewerId> viewers() const;

 private:
  std::string event_id_;
  std::size_t num_viewers_;
  std::vector<Interaction> interactions_;
  bool normalized_;
  std::vector<std::string> original_ids_;
};

// Half-open range of interaction indices.
struct IndexRange {
  std::size_t begin{0};
  std::size_t end{0};

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return begin == end; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// One event split into a time-ordered support prefix and query suffix.
struct Task {
  TemporalInteractionNetwork network;
  IndexRange support;
  IndexRange query;
  double split_ratio{0.8};

  std::span<const Interaction> support_interactions() const {
    return network.interactions().subspan(support.begin, support.size());
  }
  std::span<const Interaction> query_interactions() const {
    return network.interactions().subspan(query.begin, query.size());
  }
};

// Min-max rescales throughputs to [0,1] per event. An all-equal event maps to
// 1.0. Throws if the network is already normalized or empty.
TemporalInteractionNetwork normalize_throughput(const TemporalInteractionNetwork& network);

// The first ceil(ratio * T) interactions form the support set (clamped so
// both sets are non-empty); the rest form the query set.
Task split_task(const TemporalInteractionNetwork& network, double ratio);

// Viewers that interacted with u (either direction) at time <= t, paired with
// the most recent throughput. Sorted by viewer id.
std::vector<Neighbor> neighborhood(const TemporalInteractionNetwork& network, ViewerId u,
                                   double t);

// Incrementally maintained undirected most-recent-throughput adjacency. This
// is the tracker's view of the interactions observed so far.
class NeighborhoodIndex {
 public:
  explicit NeighborhoodIndex(std::size_t num_viewers = 0);

  void clear();
  void observe(const Interaction& interaction);

  std::span<const Neighbor> neighbors(ViewerId u) const;
  bool has_interacted(ViewerId u) const { return !neighbors(u).empty(); }
  std::size_t num_viewers() const noexcept { return adjacency_.size(); }
  std::size_t observed() const noexcept { return observed_; }

 private:
  static void upsert(std::vector<Neighbor>& row, ViewerId v, double throughput);

  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t observed_{0};
};

}  // namespace melanie::graph
