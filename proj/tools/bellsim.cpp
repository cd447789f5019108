// bellsim: Monte Carlo EPR photon-pair experiments, Bell/CHSH statistics,
// and the locality-enforcing challenge referee.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epr/montecarlo.hpp"
#include "epr/referee.hpp"
#include "epr/report.hpp"
#include "epr/station.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFault = 1;
constexpr int kExitUsage = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// ---- run ----

struct RunOpts {
  std::string model = "quantum";
  std::uint64_t pairs = 800;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out_path;
  bool strict = false;
  bool dual_bell = false;
};

int cmd_run(const RunOpts& o) {
  Timer timer;
  const epr::ModelSpec model{epr::model_from_name(o.model), {}, {}, {}};
  const epr::TrialResult r = epr::run_trial(model, o.pairs, epr::trial_key(o.seed, o.pairs, 0));

  nlohmann::json config = {{"command", "run"}, {"model", o.model}, {"pairs", o.pairs},
                           {"seed", o.seed}};
  const nlohmann::json env = epr::report::envelope(config, epr::report::to_json(r));

  if (o.format == "json") {
    std::cout << env.dump(2) << "\n";
  } else {
    std::cout << epr::report::anticorr_line(r.anticorr) << "\n";
    std::cout << epr::report::bell_line(r.bell) << "\n";
    std::cout << epr::report::chsh_line(r.chsh) << "\n";
    if (o.dual_bell) {
      const epr::BellResult dual = epr::bell_test_dual(r.tally);
      std::cout << "dual inequality {" << dual.n1u << ", " << dual.n2e << ", " << dual.n3u
                << "}  " << (dual.violated ? "violated" : "not violated") << "\n";
    }
  }
  if (!o.out_path.empty()) write_file(o.out_path, env.dump(2) + "\n");
  std::cerr << "completed in " << epr::report::fixed(timer.seconds(), 3) << " s\n";

  if (o.strict && (!r.chsh || !r.anticorr)) return kExitFault;
  return kExitOk;
}

// ---- sweep ----

struct SweepOpts {
  std::string model = "quantum";
  std::vector<std::uint64_t> pairs;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string format = "csv";
  std::string out_path;
  std::string plot_path;
  bool fig1 = false;
};

int cmd_sweep(const SweepOpts& o) {
  Timer timer;
  std::vector<std::uint64_t> pairs = o.pairs;
  std::vector<std::string> models{o.model};
  std::uint64_t trials = o.trials;
  if (o.fig1) {
    // canonical reproduction preset: both models, the six pair counts, 1000 trials
    pairs = {40, 80, 160, 200, 400, 800};
    models = {"quantum", "bell-random"};
    trials = 1000;
  }
  if (pairs.empty()) pairs = {40, 80, 160, 200, 400, 800};

  std::vector<epr::SweepReport> reports;
  for (const auto& name : models) {
    const epr::ModelSpec model{epr::model_from_name(name), {}, {}, {}};
    reports.push_back(epr::sweep(model, pairs, trials, o.seed, o.workers));
  }

  nlohmann::json config = {{"command", "sweep"},  {"models", models},
                           {"pairs", pairs},      {"trials", trials},
                           {"seed", o.seed},      {"workers", o.workers}};
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : reports) results.push_back(epr::report::to_json(r));
  const nlohmann::json env = epr::report::envelope(config, results);

  const std::string csv = epr::report::sweep_csv(reports);
  if (o.format == "json") {
    std::cout << env.dump(2) << "\n";
  } else {
    std::cout << csv;
  }
  if (!o.out_path.empty())
    write_file(o.out_path, o.format == "json" ? env.dump(2) + "\n" : csv);
  if (!o.plot_path.empty()) write_file(o.plot_path, epr::report::plot_csv(reports));
  std::cerr << "completed in " << epr::report::fixed(timer.seconds(), 3) << " s\n";
  return kExitOk;
}

// ---- challenge ----

struct ChallengeOpts {
  std::string builtin;
  std::vector<std::string> endpoints;
  std::uint64_t pairs = 800;
  std::uint64_t runs = 1;
  std::uint64_t seed = 0;
  double timeout_s = 5.0;
  std::string transcript_path;
  std::string format = "text";
  std::string out_path;
};

pid_t spawn_station(const std::string& role, const std::string& model,
                    const std::string& connect, std::uint64_t seed) {
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    const std::string seed_s = std::to_string(seed);
    ::execl("/proc/self/exe", "bellsim", "station", "--role", role.c_str(), "--model",
            model.c_str(), "--connect", connect.c_str(), "--seed", seed_s.c_str(),
            static_cast<char*>(nullptr));
    std::perror("execl");
    ::_exit(127);
  }
  return pid;
}

int cmd_challenge(const ChallengeOpts& o) {
  Timer timer;
  if (o.builtin.empty() == o.endpoints.empty()) {
    std::cerr << "challenge needs either --builtin <model> or three --endpoint addresses\n";
    return kExitUsage;
  }

  epr::SessionConfig cfg;
  cfg.n = o.pairs;
  cfg.runs = o.runs;
  cfg.master_seed = o.seed;
  cfg.timeout_s = o.timeout_s;
  std::ofstream transcript;
  if (!o.transcript_path.empty()) {
    transcript.open(o.transcript_path, std::ios::binary);
    if (!transcript) throw std::runtime_error("cannot write " + o.transcript_path);
    cfg.transcript = &transcript;
  }

  epr::SessionScore score;
  std::vector<pid_t> children;
  try {
    if (!o.builtin.empty()) {
      epr::validate_station_model(epr::model_from_name(o.builtin));
      epr::net::Listener listener;
      for (const char* role : {"source", "alice", "bob"})
        children.push_back(spawn_station(role, o.builtin, listener.bound_endpoint(), o.seed));
      score = epr::referee_session(listener, cfg);
    } else {
      if (o.endpoints.size() != 3) {
        std::cerr << "exactly three --endpoint addresses are required\n";
        return kExitUsage;
      }
      score = epr::referee_session_dial(o.endpoints, cfg);
    }
  } catch (const epr::ProtocolFault& e) {
    std::cerr << "FAULT: " << e.what() << "\n";
    for (const pid_t pid : children) ::waitpid(pid, nullptr, 0);
    return kExitFault;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const pid_t pid : children) ::waitpid(pid, nullptr, 0);
    return kExitUsage;
  }
  for (const pid_t pid : children) ::waitpid(pid, nullptr, 0);

  nlohmann::json config = {{"command", "challenge"},
                           {"builtin", o.builtin},
                           {"endpoints", o.endpoints},
                           {"pairs", o.pairs},
                           {"runs", o.runs},
                           {"seed", o.seed}};
  const nlohmann::json env = epr::report::envelope(config, epr::report::to_json(score));

  if (o.format == "json") {
    std::cout << env.dump(2) << "\n";
  } else {
    std::cout << "runs: " << score.run_results.size() << "\n";
    std::cout << "Bell violation rate: "
              << epr::report::fixed(score.bell_violation_rate, 4) << "\n";
    std::cout << "mean anti-correlation: "
              << epr::report::fixed(score.mean_anticorr_pct, 4) << "%\n";
    std::cout << "verdict: " << score.verdict << "\n";
  }
  if (!o.out_path.empty()) write_file(o.out_path, env.dump(2) + "\n");
  std::cerr << "completed in " << epr::report::fixed(timer.seconds(), 3) << " s\n";
  return kExitOk;
}

// ---- station ----

struct StationOpts {
  std::string role;
  std::string model = "bell-random";
  std::string connect;
  std::string listen;
  std::uint64_t seed = 0;
  double timeout_s = 30.0;
  bool misbehave_early_outcome = false;
};

int cmd_station(const StationOpts& o) {
  epr::StationConfig cfg;
  cfg.role = epr::station_role_from_name(o.role);
  cfg.model = epr::model_from_name(o.model);
  cfg.referee_endpoint = o.connect;
  cfg.listen_endpoint = o.listen;
  cfg.seed = o.seed;
  cfg.timeout_ms = static_cast<int>(o.timeout_s * 1000.0);
  cfg.misbehave_early_outcome = o.misbehave_early_outcome;
  return epr::run_station(cfg) ? kExitOk : kExitFault;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo EPR photon-pair experiments and Bell/CHSH statistics"};
  app.require_subcommand(1);

  RunOpts run_opts;
  auto* run = app.add_subcommand("run", "one n-pair experiment with verdicts");
  run->add_option("--model", run_opts.model, "quantum|bell-random|saturated|cheating")
      ->check(CLI::IsMember({"quantum", "bell-random", "saturated", "cheating"}));
  run->add_option("--pairs", run_opts.pairs, "photon pairs")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_opts.seed, "master seed")->envname("BELLSIM_SEED");
  run->add_option("--format", run_opts.format)->check(CLI::IsMember({"text", "json"}));
  run->add_option("--out", run_opts.out_path, "write JSON report here");
  run->add_flag("--strict", run_opts.strict, "nonzero exit on indeterminate statistics");
  run->add_flag("--dual-bell", run_opts.dual_bell, "also print the dual inequality diagnostic");

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "repeated trials over pair counts");
  sweep->add_option("--model", sweep_opts.model)
      ->check(CLI::IsMember({"quantum", "bell-random", "saturated", "cheating"}));
  sweep->add_option("--pairs", sweep_opts.pairs, "comma-separated pair counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep->add_option("--trials", sweep_opts.trials)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_opts.seed)->envname("BELLSIM_SEED");
  sweep->add_option("--workers", sweep_opts.workers)->check(CLI::PositiveNumber);
  sweep->add_option("--format", sweep_opts.format)->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", sweep_opts.out_path, "write report here");
  sweep->add_option("--plot", sweep_opts.plot_path, "write plot-ready series here");
  sweep->add_flag("--fig1", sweep_opts.fig1,
                  "preset: quantum + bell-random, n in {40..800}, 1000 trials");

  ChallengeOpts ch_opts;
  auto* challenge = app.add_subcommand("challenge", "referee a locality-enforced session");
  challenge->add_option("--builtin", ch_opts.builtin,
                        "spawn built-in HV adapters (bell-random|saturated|cheating)");
  challenge->add_option("--endpoint", ch_opts.endpoints,
                        "host:port of a listening external station (give three)");
  challenge->add_option("--pairs", ch_opts.pairs)->check(CLI::PositiveNumber);
  challenge->add_option("--runs", ch_opts.runs)->check(CLI::PositiveNumber);
  challenge->add_option("--seed", ch_opts.seed)->envname("BELLSIM_SEED");
  challenge->add_option("--timeout", ch_opts.timeout_s, "per-message timeout, seconds");
  challenge->add_option("--transcript", ch_opts.transcript_path, "write transcript here");
  challenge->add_option("--format", ch_opts.format)->check(CLI::IsMember({"text", "json"}));
  challenge->add_option("--out", ch_opts.out_path, "write JSON report here");

  StationOpts st_opts;
  auto* station = app.add_subcommand("station", "run one contender station");
  station->add_option("--role", st_opts.role, "source|alice|bob")->required();
  station->add_option("--model", st_opts.model)
      ->check(CLI::IsMember({"bell-random", "saturated", "cheating"}));
  station->add_option("--connect", st_opts.connect, "referee address to dial");
  station->add_option("--listen", st_opts.listen, "listen here for the referee instead");
  station->add_option("--seed", st_opts.seed);
  station->add_option("--timeout", st_opts.timeout_s);
  station->add_flag("--misbehave-early-outcome", st_opts.misbehave_early_outcome)
      ->group("");  // test hook, hidden from help

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*challenge) return cmd_challenge(ch_opts);
    if (*station) return cmd_station(st_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitUsage;
}
