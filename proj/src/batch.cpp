#include "pinaudio/batch.hpp"

#include <omp.h>

namespace pinaudio {

void set_worker_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int worker_threads() { return omp_get_max_threads(); }

std::vector<DetectionResult> detect_batch(std::span<const AudioClip> clips, const PipelineConfig& cfg,
                                          Execution exec) {
  std::vector<DetectionResult> out(clips.size());
  for_each_index(clips.size(), exec, [&](std::size_t i) { out[i] = detect_keystrokes(clips[i], cfg); });
  return out;
}

std::vector<AttackOutcome> attack_batch(const ModelBank& bank, std::span<const AttackJob> jobs, Execution exec,
                                        const TripletIndex& index) {
  std::vector<AttackOutcome> out(jobs.size());
  for_each_index(jobs.size(), exec, [&](std::size_t i) {
    out[i].ranking = run_attack(bank, jobs[i].gaps, jobs[i].knowledge, index);
    if (jobs[i].truth) out[i].rank = attempts_to_guess(out[i].ranking, *jobs[i].truth);
  });
  return out;
}

std::vector<std::optional<std::size_t>> rank_batch(const ModelBank& bank, std::span<const AttackJob> jobs,
                                                   Execution exec, const TripletIndex& index) {
  std::vector<std::optional<std::size_t>> out(jobs.size());
  for_each_index(jobs.size(), exec, [&](std::size_t i) {
    if (!jobs[i].truth) return;
    out[i] = attempts_to_guess(run_attack(bank, jobs[i].gaps, jobs[i].knowledge, index), *jobs[i].truth);
  });
  return out;
}

}  // namespace pinaudio
