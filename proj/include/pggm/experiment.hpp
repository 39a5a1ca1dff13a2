#ifndef PGGM_EXPERIMENT_HPP
#define PGGM_EXPERIMENT_HPP

// One benchmark repetition: generate -> fit -> summarize -> metrics, and a
// small worker pool that keeps results in repetition order.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pggm/evaluation.hpp"
#include "pggm/gibbs.hpp"
#include "pggm/scenarios.hpp"

namespace pggm {

struct RepetitionResult {
  int repetition = 0;
  std::map<std::string, double> metrics;
  std::optional<std::string> error;
  Variant variant = Variant::s;
};

/// Hook to adjust the recommended hyperparameters of a scenario.
using HyperAdjust = std::function<void(Hyperparameters&, const ScenarioData&)>;

/// Repetition `rep` uses Rng(seed).split(rep): sub-stream 0 draws the data and
/// sub-stream 1 drives the chain.
inline RepetitionResult run_repetition(const ScenarioSpec& spec, const GibbsConfig& config,
                                       std::uint64_t seed, int rep, const HyperAdjust& adjust = {}) {
  RepetitionResult r;
  r.repetition = rep;
  try {
    Rng stream = Rng(seed).split(static_cast<std::uint64_t>(rep));
    Rng data_rng = stream.split(0), chain_rng = stream.split(1);
    const ScenarioData sd = generate(spec, data_rng);
    Hyperparameters h = sd.hyper;
    if (adjust) adjust(h, sd);
    r.variant = h.variant;
    const ChainOutput chain = run_chain(sd.train, sd.groups, h, config, chain_rng);
    if (chain.error) {
      r.error = *chain.error;
      return r;
    }
    const PosteriorSummary s = summarize(chain);
    const FScore f = f_score(s.support, sd.truth.support);
    r.metrics["f_score"] = f.f;
    r.metrics["precision"] = f.precision;
    r.metrics["recall"] = f.recall;
    r.metrics["mspe"] = mspe(s.B_hat, sd.test);
    r.metrics["oracle_mspe"] = mspe(sd.truth.B, sd.test);
    r.metrics["noise_floor"] = sd.noise_floor();
    r.metrics["selected"] = static_cast<double>(f.tp + f.fp);
    if (sd.groups.m() > 1 && sd.groups.m() < sd.groups.p()) {
      std::vector<char> est(static_cast<std::size_t>(sd.groups.m()), 0), truth(est.size(), 0);
      for (int i = 0; i < sd.groups.p(); ++i) {
        const auto g = static_cast<std::size_t>(sd.groups.group_of(i));
        est[g] = est[g] || s.support[static_cast<std::size_t>(i)];
        truth[g] = truth[g] || sd.truth.support[static_cast<std::size_t>(i)];
      }
      r.metrics["group_f_score"] = f_score(est, truth).f;
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

/// Runs task(i) for i in [0, count) on `threads` workers.
inline void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

inline std::vector<RepetitionResult> run_repetitions(const ScenarioSpec& spec, const GibbsConfig& config,
                                                     std::uint64_t seed, int reps, int threads = 1,
                                                     const HyperAdjust& adjust = {}) {
  std::vector<RepetitionResult> out(static_cast<std::size_t>(reps));
  parallel_for(reps, threads, [&](int i) { out[static_cast<std::size_t>(i)] = run_repetition(spec, config, seed, i, adjust); });
  return out;
}

}  // namespace pggm

#endif  // PGGM_EXPERIMENT_HPP
