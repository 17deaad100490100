#pragma once

#include <atomic>
#include <cstdint>

namespace melanie::instrumentation {

// Process-wide call counters. Used to check which code paths an experiment
// variant exercised.
struct Counters {
  std::atomic<std::uint64_t> kl_priorities{0};
  std::atomic<std::uint64_t> meta_loss_evaluations{0};
  std::atomic<std::uint64_t> signature_divergences{0};
  std::atomic<std::uint64_t> gradient_steps{0};
};

Counters& counters();

struct Snapshot {
  std::uint64_t kl_priorities;
  std::uint64_t meta_loss_evaluations;
  std::uint64_t signature_divergences;
  std::uint64_t gradient_steps;
};

Snapshot snapshot();
void reset();

}  // namespace melanie::instrumentation
