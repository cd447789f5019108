// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Statistical tolerances are 3-sigma binomial bounds with a
// floor of 2 counts at the distribution edges.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "epr/montecarlo.hpp"
#include "epr/referee.hpp"
#include "epr/report.hpp"
#include "epr/station.hpp"

using namespace epr;

namespace {

int g_failures = 0;

void report_line(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double binomial_tolerance(double expected, double total) {
  const double p = expected / total;
  return std::max(3.0 * std::sqrt(p * (1.0 - p) * total), 2.0);
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

const std::vector<std::uint64_t> kFig1Pairs{40, 80, 160, 200, 400, 800};
constexpr std::uint64_t kSeed = 20240817;

bool check_counts(const SweepReport& report, const std::vector<double>& expected_bell,
                  const std::vector<double>& expected_chsh, std::string& detail) {
  bool ok = true;
  std::ostringstream os;
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& row = report.rows[k];
    const double R = static_cast<double>(report.trials);
    const double bell_tol = binomial_tolerance(expected_bell[k], R);
    const double chsh_tol = binomial_tolerance(expected_chsh[k], R);
    const bool bell_ok =
        std::abs(static_cast<double>(row.bell_obeyed) - expected_bell[k]) <= bell_tol;
    const bool chsh_ok =
        std::abs(static_cast<double>(row.chsh_obeyed) - expected_chsh[k]) <= chsh_tol;
    ok = ok && bell_ok && chsh_ok;
    os << " n=" << row.n << " bell=" << row.bell_obeyed << "/" << expected_bell[k]
       << (bell_ok ? "" : "(!)") << " chsh=" << row.chsh_obeyed << "/" << expected_chsh[k]
       << (chsh_ok ? "" : "(!)");
  }
  detail += os.str();
  return ok;
}

SweepReport g_quantum_sweep;  // shared between criteria 1 and 3

void criterion_1() {
  Timer timer;
  g_quantum_sweep = sweep(ModelSpec::quantum(), kFig1Pairs, 1000, kSeed, 1);
  const double secs = timer.seconds();
  std::string detail = "quantum sweep reproduction (" + report::fixed(secs, 1) + " s):";
  bool ok = check_counts(g_quantum_sweep, {350, 253, 164, 123, 52, 9},
                         {150, 103, 39, 21, 1, 0}, detail);
  if (secs >= 60.0) {
    ok = false;
    detail += " over 60 s budget";
  }
  report_line(1, ok, detail);
}

void criterion_2() {
  const auto report = sweep(ModelSpec::bell_random(), kFig1Pairs, 1000, kSeed, 1);
  std::string detail = "hidden-variable sweep reproduction:";
  bool ok = check_counts(report, {925, 983, 995, 1000, 1000, 1000},
                         {794, 969, 999, 1000, 1000, 1000}, detail);
  const std::uint64_t violations_at_800 = report.trials - report.rows.back().bell_obeyed;
  if (violations_at_800 > 2) {
    ok = false;
    detail += " bell violations at n=800: " + std::to_string(violations_at_800) + " (> 2)";
  }
  report_line(2, ok, detail);
}

void criterion_3() {
  // independent oracle: E_d = -cos(2 delta_d), S = 1 + sqrt(2)
  const double deltas[4] = {0.0, -std::numbers::pi / 8, std::numbers::pi / 4,
                            -3 * std::numbers::pi / 8};
  double e[4];
  for (int d = 0; d < 4; ++d) e[d] = -std::cos(2 * deltas[d]);
  const double analytic = std::max({std::abs(e[0] + e[1] + e[2] - e[3]),
                                    std::abs(e[0] + e[1] - e[2] + e[3]),
                                    std::abs(e[0] - e[1] + e[2] + e[3]),
                                    std::abs(e[1] + e[2] + e[3] - e[0])});
  const double mean_s = g_quantum_sweep.rows.back().mean_s;
  const bool ok = std::abs(analytic - (1.0 + std::numbers::sqrt2)) < 1e-12 &&
                  std::abs(mean_s - 2.414) <= 0.03;
  report_line(3, ok,
              "quantum mean S at n=800: " + report::fixed(mean_s, 4) + " vs 2.414 +- 0.03"
              " (analytic asymptote " + report::fixed(analytic, 5) + ")");
}

struct RateSummary {
  double bell_rate{0};
  double chsh_rate{0};
  double mean_ac{0};
  bool all_perfect{true};
};

RateSummary model_rates(const ModelSpec& model, std::uint64_t n, int trials,
                        std::uint64_t seed) {
  RateSummary s;
  int bell_v = 0, chsh_v = 0;
  double ac_sum = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = run_trial(model, n, trial_key(seed, n, t));
    if (r.bell.violated) ++bell_v;
    if (r.chsh && r.chsh->violated) ++chsh_v;
    if (r.anticorr) {
      ac_sum += r.anticorr->percent;
      if (!r.anticorr->perfect) s.all_perfect = false;
    }
  }
  s.bell_rate = bell_v / static_cast<double>(trials);
  s.chsh_rate = chsh_v / static_cast<double>(trials);
  s.mean_ac = ac_sum / trials;
  return s;
}

void criterion_4() {
  const auto s = model_rates(ModelSpec::saturated(), 800, 2000, kSeed);
  const bool ok = std::abs(s.bell_rate - 0.50) <= 0.04 &&
                  std::abs(s.chsh_rate - 0.50) <= 0.04 && s.all_perfect;
  report_line(4, ok,
              "saturated rates: bell=" + report::fixed(s.bell_rate, 4) +
                  " chsh=" + report::fixed(s.chsh_rate, 4) +
                  " audit_perfect=" + (s.all_perfect ? "yes" : "no"));
}

void criterion_5() {
  const auto s = model_rates(ModelSpec::cheating(), 800, 2000, kSeed);
  const bool ok = std::abs(s.bell_rate - 0.85) <= 0.04 &&
                  std::abs(s.chsh_rate - 0.50) <= 0.05 &&
                  std::abs(s.mean_ac - 87.0) <= 1.5;
  report_line(5, ok,
              "cheating rates: bell=" + report::fixed(s.bell_rate, 4) +
                  " chsh=" + report::fixed(s.chsh_rate, 4) +
                  " anticorr=" + report::fixed(s.mean_ac, 2) + "%");
}

void criterion_6() {
  Timer timer;
  bool ok = true;
  auto triple_of = [](int i) { return HvTriple{(i >> 2) & 1, (i >> 1) & 1, i & 1}; };
  const AngleSetting settings[4] = {{0, 0}, {3, 2}, {0, 2}, {3, 0}};

  // anti-correlation identity and saturate laws over all 8 triples
  std::set<int> image;
  for (int i = 0; i < 8; ++i) {
    const PreparedPair p{triple_of(i), i};
    ok = ok && measure_alice(p, 0, false) == 1 - measure_bob(p, 0);
    const HvTriple once = saturate(triple_of(i));
    ok = ok && saturate(once) == once;
    image.insert(class_index(once));
  }
  ok = ok && image == std::set<int>{0, 1, 3, 4, 6, 7};

  // 32-cell outcome table
  const int expected[8][4][2] = {
      {{1, 0}, {0, 0}, {1, 0}, {0, 0}}, {{1, 0}, {0, 1}, {1, 1}, {0, 0}},
      {{0, 1}, {0, 0}, {0, 0}, {0, 1}}, {{0, 1}, {0, 1}, {0, 1}, {0, 1}},
      {{1, 0}, {1, 0}, {1, 0}, {1, 0}}, {{1, 0}, {1, 1}, {1, 1}, {1, 0}},
      {{0, 1}, {1, 0}, {0, 0}, {1, 1}}, {{0, 1}, {1, 1}, {0, 1}, {1, 1}}};
  for (int i = 0; i < 8; ++i) {
    for (int d = 0; d < 4; ++d) {
      const PreparedPair p{triple_of(i), i};
      ok = ok && measure_alice(p, settings[d].a, false) == expected[i][d][0] &&
           measure_bob(p, settings[d].b) == expected[i][d][1];
    }
  }

  // strict-inequality boundary: 142 vs 102 + 40
  Tally t;
  t.by_config[1] = {200, 58, 142};
  t.by_config[2] = {200, 102, 98};
  t.by_config[3] = {200, 160, 40};
  t.by_config[0] = {200, 0, 200};
  ok = ok && !bell_test(t).violated;

  const double secs = timer.seconds();
  ok = ok && secs < 1.0;
  report_line(6, ok, "exhaustive exactness suite (" + report::fixed(secs, 3) + " s)");
}

void criterion_7() {
  const auto r = run_trial(ModelSpec::bell_random(), 8000, trial_key(kSeed, 8000, 0));
  const double stat = r.class_matrix ? class_config_check(*r.class_matrix) : 1e9;
  report_line(7, stat < 5.0,
              "class-config statistic at n=8000: " + report::fixed(stat, 3) + " < 5");
}

SessionScore referee_with_threads(ModelVariant model, std::uint64_t n, std::uint64_t runs,
                                  std::uint64_t referee_seed, std::uint64_t station_seed,
                                  bool misbehave, bool& faulted) {
  net::Listener listener;
  std::vector<std::thread> stations;
  for (const StationRole role : {StationRole::Source, StationRole::Alice, StationRole::Bob}) {
    StationConfig cfg;
    cfg.role = role;
    cfg.model = model;
    cfg.referee_endpoint = listener.bound_endpoint();
    cfg.seed = station_seed;
    cfg.timeout_ms = 20000;
    cfg.misbehave_early_outcome = misbehave && role == StationRole::Alice;
    stations.emplace_back([cfg] {
      try {
        run_station(cfg);
      } catch (...) {
      }
    });
  }
  SessionConfig cfg;
  cfg.n = n;
  cfg.runs = runs;
  cfg.master_seed = referee_seed;
  cfg.timeout_s = 20.0;
  SessionScore score;
  faulted = false;
  try {
    score = referee_session(listener, cfg);
  } catch (const ProtocolFault&) {
    faulted = true;
  }
  for (auto& th : stations) th.join();
  return score;
}

void criterion_8() {
  Timer timer;
  bool ok = true;
  std::ostringstream detail;
  detail << "challenge-harness equivalence:";
  const int runs = 200;
  for (const ModelVariant model : {ModelVariant::BellRandom, ModelVariant::Saturated,
                                   ModelVariant::Cheating}) {
    // in-process oracle with an unrelated seed; compare at 3 sigma
    const auto oracle = model_rates(ModelSpec{model, {}, {}, {}}, 800, runs, kSeed + 1);
    bool faulted = false;
    const auto score =
        referee_with_threads(model, 800, runs, kSeed + 2, kSeed + 3, false, faulted);
    const double p = oracle.bell_rate;
    const double sigma = std::sqrt(std::max(2.0 * p * (1.0 - p) / runs, 1e-9));
    const double diff = std::abs(score.bell_violation_rate - p);
    const bool match = !faulted && diff <= std::max(3.0 * sigma, 2.0 / runs);
    ok = ok && match;
    detail << ' ' << model_name(model) << "=" << report::fixed(score.bell_violation_rate, 3)
           << "/" << report::fixed(p, 3) << (match ? "" : "(!)");
  }
  int faults = 0;
  const int attempts = 20;
  for (int k = 0; k < attempts; ++k) {
    bool faulted = false;
    referee_with_threads(ModelVariant::BellRandom, 20, 1, k, k, true, faulted);
    if (faulted) ++faults;
  }
  ok = ok && faults == attempts;
  detail << " misbehaving-station faults " << faults << "/" << attempts;
  const double secs = timer.seconds();
  if (secs >= 120.0) ok = false;
  detail << " (" << report::fixed(secs, 1) << " s)";
  report_line(8, ok, detail.str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int run_cli(const std::string& bin, const std::string& args) {
  const std::string cmd = bin + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

void criterion_9() {
  const char* bin = std::getenv("BELLSIM_BIN");
  if (!bin) {
    report_line(9, false, "BELLSIM_BIN not set; cannot exercise the CLI");
    return;
  }
  const std::string tmp = "/tmp/bellsim_acceptance";
  bool ok = true;
  std::string detail = "determinism:";

  // identical seeds, identical bytes
  ok = ok && run_cli(bin, "sweep --model quantum --pairs 40,200 --trials 200 --seed 12 --out " + tmp + "_a.csv") == 0;
  ok = ok && run_cli(bin, "sweep --model quantum --pairs 40,200 --trials 200 --seed 12 --out " + tmp + "_b.csv") == 0;
  const bool csv_same = slurp(tmp + "_a.csv") == slurp(tmp + "_b.csv") &&
                        !slurp(tmp + "_a.csv").empty();
  detail += csv_same ? " csv-rerun=identical" : " csv-rerun=DIFFERS";
  ok = ok && csv_same;

  // worker count must not change the report
  ok = ok && run_cli(bin, "sweep --model saturated --pairs 80,400 --trials 200 --seed 9 --workers 1 --out " + tmp + "_w1.csv") == 0;
  ok = ok && run_cli(bin, "sweep --model saturated --pairs 80,400 --trials 200 --seed 9 --workers 8 --out " + tmp + "_w8.csv") == 0;
  const bool workers_same = slurp(tmp + "_w1.csv") == slurp(tmp + "_w8.csv") &&
                            !slurp(tmp + "_w1.csv").empty();
  detail += workers_same ? " workers-1v8=identical" : " workers-1v8=DIFFERS";
  ok = ok && workers_same;

  // JSON reports too
  ok = ok && run_cli(bin, "run --model cheating --pairs 800 --seed 4 --out " + tmp + "_r1.json") == 0;
  ok = ok && run_cli(bin, "run --model cheating --pairs 800 --seed 4 --out " + tmp + "_r2.json") == 0;
  const bool json_same = slurp(tmp + "_r1.json") == slurp(tmp + "_r2.json") &&
                         !slurp(tmp + "_r1.json").empty();
  detail += json_same ? " json-rerun=identical" : " json-rerun=DIFFERS";
  ok = ok && json_same;

  report_line(9, ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
  else std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
