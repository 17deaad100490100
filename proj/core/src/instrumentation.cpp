#include "melanie/instrumentation.hpp"

namespace melanie::instrumentation {

Counters& counters() {
  static Counters instance;
  return instance;
}

Snapshot snapshot() {
  const Counters& c = counters();
  return Snapshot{c.kl_priorities.load(), c.meta_loss_evaluations.load(),
                  c.signature_divergences.load(), c.gradient_steps.load()};
}

void reset() {
  Counters& c = counters();
  c.kl_priorities = 0;
  c.meta_loss_evaluations = 0;
  c.signature_divergences = 0;
  c.gradient_steps = 0;
}

}  // namespace melanie::instrumentation
