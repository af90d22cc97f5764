#pragma once

#include <cstdint>

namespace evochain::testing {

struct HistoryStats {
  long issues_ok{0};
  long issues_rejected{0};
  long cancels_ok{0};
  long cancels_rejected{0};
  long cascade_canceled{0};
  long queries{0};
  long views_present{0};
  long views_absent{0};
  long consolidations{0};
  long raises_ok{0};
  long raises_rejected{0};

  void merge(const HistoryStats& other) {
    issues_ok += other.issues_ok;
    issues_rejected += other.issues_rejected;
    cancels_ok += other.cancels_ok;
    cancels_rejected += other.cancels_rejected;
    cascade_canceled += other.cascade_canceled;
    queries += other.queries;
    views_present += other.views_present;
    views_absent += other.views_absent;
    consolidations += other.consolidations;
    raises_ok += other.raises_ok;
    raises_rejected += other.raises_rejected;
  }
};

// Runs one seeded random history over a generic key-value app (six keys,
// expiration and condition policies, cancels, delay raises, clock jumps,
// queries) and checks after every step: view-vs-oracle byte equality,
// validity monotonicity, dependency implication, hash chain integrity; at
// the end: byte replay and graph reconstruction. Throws
// Error(ScenarioAssertionFailed) naming the seed and step on any violation.
void run_random_history(std::uint64_t seed, HistoryStats& stats);

}  // namespace evochain::testing
