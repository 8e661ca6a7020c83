#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "draftcheck/core/types.hpp"
#include "draftcheck/store/event_store.hpp"

namespace draftcheck::synth {

struct InfeasibleSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RoundSpec {
  std::string round_id;
  std::size_t submitted{0};
  PromptVersion prompt_version{PromptVersion::V1};
};

// Fractions of a round's submitters in each engagement class. Must sum to 1 (within 1e-9).
struct EngagementMix {
  double never_use{0.55};
  double single_use{0.25};
  double multi_use{0.08};   // two or more requests, last error count not below the first
  double correcting{0.12};  // two or more requests, last error count strictly below the first
};

struct SyntheticCohortSpec {
  std::size_t n_students{76};
  std::vector<RoundSpec> rounds;
  EngagementMix mix;
  std::uint64_t seed{42};
  // Per round, among feedback users; capped at the number of users.
  std::size_t too_many_task_students{1};
  std::size_t too_few_task_students{1};

  // Throws InfeasibleSpec.
  void validate() const;
};

// 76 students; round1 has 69 submissions under prompt v1, round2 has 49 under v2.
SyntheticCohortSpec default_cohort_spec();

// Class sizes for `submitted` students, in the order never, single, multi, correcting.
// Largest-remainder apportionment: each class gets floor(fraction * submitted), and the leftover
// students go one each to the classes with the largest fractional parts (ties: earlier class).
std::array<std::size_t, 4> apportion(std::size_t submitted, const EngagementMix& mix);

struct RoundSummary {
  std::string round_id;
  std::array<std::size_t, 4> engagement{};  // never, single, multi, correcting
  std::size_t records{0};
  std::size_t too_many_task_students{0};
  std::size_t too_few_task_students{0};
};

// Drafts are written in the mock grammar and sent through the mock provider, so every stored
// table is a real pipeline output. Deterministic for a given spec.
std::vector<RoundSummary> generate_cohort(const SyntheticCohortSpec& spec, EventStore& store);

// SplitMix64 with rejection sampling, so output is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

}  // namespace draftcheck::synth
