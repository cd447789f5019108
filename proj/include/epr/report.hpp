#pragma once

// Report rendering: the paper-style verdict lines, machine-readable JSON
// envelopes, and the sweep CSV. All numeric output is locale-independent
// ("C" locale formatting, LF line endings).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "epr/montecarlo.hpp"
#include "epr/referee.hpp"
#include "epr/stats.hpp"

namespace epr::report {

inline constexpr const char* kToolName = "bellsim";
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---- verdict lines, phrased like the original output blocks ----

inline std::string anticorr_line(const std::optional<AntiCorrResult>& ac) {
  if (!ac) return "No pairs at equal angles; anti-correlation check indeterminate.";
  if (ac->perfect) return "Anti-correlation at equal angles OK.";
  return fixed(ac->percent, 4) +
         "% Anti-correlation only. Model fails to describe the anti-correlation "
         "when Alice and Bob happen to measure with the same angle.";
}

inline std::string bell_line(const BellResult& bell) {
  return "{" + std::to_string(bell.n1u) + ", " + std::to_string(bell.n2e) + ", " +
         std::to_string(bell.n3u) + "}  " +
         (bell.violated ? "Bell's inequality is violated!" : "Bell inequality not violated.");
}

inline std::string chsh_line(const std::optional<ChshResult>& c) {
  if (!c) return "CHSH indeterminate (empty angle configuration).";
  return "{" + fixed(c->s, 5) + ", " +
         (c->violated ? "CHSH inequality is violated!" : "CHSH inequality is not violated.") +
         "}";
}

// ---- JSON ----

inline nlohmann::json to_json(const Tally& t) {
  nlohmann::json j = nlohmann::json::array();
  for (int d = 0; d < 4; ++d) {
    j.push_back({{"d", d},
                 {"total", t.by_config[d].total},
                 {"equal", t.by_config[d].equal},
                 {"unequal", t.by_config[d].unequal}});
  }
  return j;
}

inline nlohmann::json to_json(const TrialResult& r) {
  nlohmann::json j;
  j["tally"] = to_json(r.tally);
  j["bell"] = {{"n1u", r.bell.n1u},
               {"n2e", r.bell.n2e},
               {"n3u", r.bell.n3u},
               {"violated", r.bell.violated}};
  if (r.chsh) {
    j["chsh"] = {{"e", r.chsh->e}, {"s", r.chsh->s}, {"violated", r.chsh->violated}};
  } else {
    j["chsh"] = nullptr;
  }
  if (r.anticorr) {
    j["anticorr"] = {{"n0", r.anticorr->equal_angle_total},
                     {"misses", r.anticorr->misses},
                     {"percent", r.anticorr->percent},
                     {"perfect", r.anticorr->perfect}};
  } else {
    j["anticorr"] = nullptr;
  }
  if (r.class_matrix) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = 0; i < 8; ++i) m.push_back(r.class_matrix->counts[i]);
    j["class_matrix"] = m;
    j["class_config_statistic"] = class_config_check(*r.class_matrix);
  }
  return j;
}

inline nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"pairs", row.n},
                    {"bell_obeyed", row.bell_obeyed},
                    {"chsh_obeyed", row.chsh_obeyed},
                    {"chsh_indeterminate", row.chsh_indeterminate},
                    {"mean_S", row.mean_s},
                    {"mean_anticorr_pct", row.mean_anticorr_pct}});
  }
  nlohmann::json j;
  j["model"] = model_name(r.model.variant);
  j["trials"] = r.trials;
  j["seed"] = r.master_seed;
  j["rows"] = rows;
  return j;
}

inline nlohmann::json to_json(const SessionScore& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : s.run_results) runs.push_back(to_json(r));
  nlohmann::json j;
  j["bell_violation_rate"] = s.bell_violation_rate;
  j["mean_anticorr_pct"] = s.mean_anticorr_pct;
  j["quantum_like"] = s.quantum_like;
  j["verdict"] = s.verdict;
  j["runs"] = runs;
  return j;
}

// Configuration is echoed verbatim so any report can be regenerated from its
// own header. Wall-clock duration goes to the console, never into the
// machine report, which must be byte-identical across equal-seed runs.
inline nlohmann::json envelope(const nlohmann::json& config, const nlohmann::json& results) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config"] = config;
  j["results"] = results;
  return j;
}

// ---- CSV ----

inline std::string sweep_csv(const SweepReport& r) {
  std::string out =
      "model,pairs,trials,bell_obeyed,chsh_obeyed,chsh_indeterminate,mean_S,"
      "mean_anticorr_pct\n";
  for (const auto& row : r.rows) {
    out += model_name(r.model.variant);
    out += ',' + std::to_string(row.n);
    out += ',' + std::to_string(r.trials);
    out += ',' + std::to_string(row.bell_obeyed);
    out += ',' + std::to_string(row.chsh_obeyed);
    out += ',' + std::to_string(row.chsh_indeterminate);
    out += ',' + fixed(row.mean_s);
    out += ',' + fixed(row.mean_anticorr_pct);
    out += '\n';
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepReport>& reports) {
  std::string out;
  bool first = true;
  for (const auto& r : reports) {
    std::string chunk = sweep_csv(r);
    if (!first) chunk.erase(0, chunk.find('\n') + 1);  // drop repeated header
    out += chunk;
    first = false;
  }
  return out;
}

// plot-ready series: one (log2 pairs, obeyed count) row per n, per inequality
inline std::string plot_csv(const std::vector<SweepReport>& reports) {
  std::string out = "series,log2_pairs,obeyed\n";
  for (const auto& r : reports) {
    const std::string model = model_name(r.model.variant);
    for (const auto& row : r.rows) {
      const double lg = std::log2(static_cast<double>(row.n));
      out += model + "-bell," + fixed(lg, 4) + ',' + std::to_string(row.bell_obeyed) + '\n';
      out += model + "-chsh," + fixed(lg, 4) + ',' + std::to_string(row.chsh_obeyed) + '\n';
    }
  }
  return out;
}

}  // namespace epr::report
