#pragma once

// Data-parallel batch kernels. Every kernel takes an Execution policy; the
// serial path is the reference the OpenMP path is tested against.

#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinaudio/attack.hpp"
#include "pinaudio/audio.hpp"

namespace pinaudio {

enum class Execution { serial, parallel };

/// Number of OpenMP threads; 0 leaves the runtime default.
void set_worker_threads(int threads);
int worker_threads();

/// Runs body(i) for i in [0, n). Iterations must be independent. The first
/// exception thrown (lowest index) is rethrown after the loop.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<DetectionResult> detect_batch(std::span<const AudioClip> clips, const PipelineConfig& cfg,
                                          Execution exec);

struct AttackJob {
  GapSequence gaps;
  KnowledgeSpec knowledge;
  std::optional<Pin> truth;
};

struct AttackOutcome {
  PinRanking ranking;
  std::optional<std::size_t> rank;  // set when the job carried a truth PIN
};

std::vector<AttackOutcome> attack_batch(const ModelBank& bank, std::span<const AttackJob> jobs, Execution exec,
                                        const TripletIndex& index = TripletIndex::standard());

/// Same as attack_batch but keeps only the rank of the true PIN.
std::vector<std::optional<std::size_t>> rank_batch(const ModelBank& bank, std::span<const AttackJob> jobs,
                                                   Execution exec,
                                                   const TripletIndex& index = TripletIndex::standard());

}  // namespace pinaudio
