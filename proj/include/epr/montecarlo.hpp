#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "epr/core.hpp"
#include "epr/hv.hpp"
#include "epr/stats.hpp"

namespace epr {

// Substream labels hanging off a trial key. Angle draws and model draws come
// from separate streams so a referee can reproduce the angle sequence without
// knowing anything about the preparation.
inline constexpr std::uint64_t kAngleStream = 0;
inline constexpr std::uint64_t kModelStream = 1;

inline StreamKey trial_key(std::uint64_t master_seed, std::uint64_t n,
                           std::uint64_t trial_index) {
  return root_key(master_seed).derive(n).derive(trial_index);
}

struct TrialResult {
  Tally tally{};
  BellResult bell{};
  std::optional<ChshResult> chsh{};
  std::optional<AntiCorrResult> anticorr{};
  std::optional<ClassConfigMatrix> class_matrix{};
};

inline TrialResult evaluate(const Tally& t,
                            std::optional<ClassConfigMatrix> matrix = std::nullopt) {
  TrialResult r;
  r.tally = t;
  r.bell = bell_test(t);
  r.chsh = chsh(t);
  r.anticorr = anticorr_audit(t);
  r.class_matrix = std::move(matrix);
  return r;
}

// One n-pair experiment. Settings are drawn from the angle substream,
// preparation and outcomes from the model substream; within each stream the
// per-pair draw order is pinned (Alice first).
inline TrialResult run_trial(const ModelSpec& model, std::uint64_t n, StreamKey key) {
  if (n < 1) throw std::invalid_argument("need at least one pair");
  if (model.variant == ModelVariant::External)
    throw std::invalid_argument("external models run through the referee, not in-process");

  RngStream angle_rng{key.derive(kAngleStream)};
  RngStream model_rng{key.derive(kModelStream)};

  Tally t;
  if (model.variant == ModelVariant::Quantum) {
    for (std::uint64_t j = 0; j < n; ++j) {
      const AngleSetting setting = draw_setting(angle_rng);
      const Outcome out = quantum_measure(model_rng, setting);
      t.add(PairRecord{j, setting, out.alice, out.bob});
    }
    return evaluate(t);
  }

  const bool cheat = cheats_at_measurement(model.variant);
  ClassConfigMatrix matrix;
  for (std::uint64_t j = 0; j < n; ++j) {
    const AngleSetting setting = draw_setting(angle_rng);
    const PreparedPair pair = prepare_pair(model, model_rng);
    const int a_bit = measure_alice(pair, setting.a, cheat);
    const int b_bit = measure_bob(pair, setting.b);
    t.add(PairRecord{j, setting, a_bit, b_bit});
    matrix.add(class_index(pair.hv), config_of(setting).d);
  }
  return evaluate(t, matrix);
}

inline TrialResult run_trial(const RunConfig& cfg, std::uint64_t trial_index = 0) {
  return run_trial(cfg.model, cfg.n, trial_key(cfg.seed, cfg.n, trial_index));
}

struct SweepRow {
  std::uint64_t n{0};
  std::uint64_t bell_obeyed{0};
  std::uint64_t chsh_obeyed{0};
  std::uint64_t chsh_indeterminate{0};
  double mean_s{0.0};
  double mean_anticorr_pct{0.0};
};

struct SweepReport {
  ModelSpec model{};
  std::uint64_t trials{0};
  std::uint64_t master_seed{0};
  std::vector<SweepRow> rows;
};

// R trials per n, substreams keyed (master_seed, n, trial). Trials are
// farmed out across workers by index stride; aggregation happens afterwards
// in index order, so the report is independent of the worker count.
inline SweepReport sweep(const ModelSpec& model, const std::vector<std::uint64_t>& n_values,
                         std::uint64_t trials, std::uint64_t master_seed,
                         unsigned workers = 1) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (n_values.empty()) throw std::invalid_argument("need at least one pair count");
  if (workers < 1) workers = 1;

  SweepReport report;
  report.model = model;
  report.trials = trials;
  report.master_seed = master_seed;

  for (const std::uint64_t n : n_values) {
    std::vector<TrialResult> results(trials);
    auto worker = [&](std::uint64_t start) {
      for (std::uint64_t t = start; t < trials; t += workers)
        results[t] = run_trial(model, n, trial_key(master_seed, n, t));
    };
    if (workers == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
      for (auto& th : pool) th.join();
    }

    SweepRow row;
    row.n = n;
    double s_sum = 0.0;
    double ac_sum = 0.0;
    std::uint64_t s_count = 0;
    std::uint64_t ac_count = 0;
    for (const auto& r : results) {
      if (!r.bell.violated) ++row.bell_obeyed;
      if (r.chsh) {
        if (!r.chsh->violated) ++row.chsh_obeyed;
        s_sum += r.chsh->s;
        ++s_count;
      } else {
        ++row.chsh_indeterminate;
      }
      if (r.anticorr) {
        ac_sum += r.anticorr->percent;
        ++ac_count;
      }
    }
    row.mean_s = s_count ? s_sum / static_cast<double>(s_count) : 0.0;
    row.mean_anticorr_pct = ac_count ? ac_sum / static_cast<double>(ac_count) : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace epr
