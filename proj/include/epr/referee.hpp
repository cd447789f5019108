#pragma once

// The locality-enforcing referee. Transport topology is a star: the three
// stations (source, alice, bob) each hold one connection to the referee and
// no path to each other. Hidden-variable payloads are delivered and
// acknowledged before any angle is drawn, let alone revealed.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epr/montecarlo.hpp"
#include "epr/net.hpp"
#include "epr/protocol.hpp"
#include "epr/stats.hpp"

namespace epr {

struct SessionConfig {
  std::uint64_t n{800};
  std::uint64_t runs{1};
  std::uint64_t master_seed{0};  // referee's angle draws only
  double timeout_s{5.0};
  std::ostream* transcript{nullptr};

  int timeout_ms() const { return static_cast<int>(timeout_s * 1000.0); }
};

struct SessionScore {
  std::vector<TrialResult> run_results;
  double bell_violation_rate{0.0};
  double mean_anticorr_pct{0.0};
  bool quantum_like{false};
  std::string verdict;
};

struct ProtocolFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t mono_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

class RefereeLink {
 public:
  RefereeLink(net::Connection conn, std::ostream* transcript)
      : conn_(std::move(conn)), transcript_(transcript) {}

  void send(const proto::Message& m) {
    log("send", m);
    conn_.send_line(m.encode());
  }

  proto::Message recv(int timeout_ms) {
    proto::Message m;
    try {
      m = proto::Message::decode(conn_.recv_line(timeout_ms));
    } catch (const net::Timeout&) {
      throw ProtocolFault("timeout waiting for " + role_);
    } catch (const std::exception& e) {
      throw ProtocolFault("transport/envelope error from " + role_ + ": " + e.what());
    }
    log("recv", m);
    return m;
  }

  proto::Message expect(proto::Kind kind, std::uint64_t pair_id, int timeout_ms) {
    proto::Message m = recv(timeout_ms);
    if (m.kind != kind)
      throw ProtocolFault("out-of-order message from " + role_ + ": expected " +
                          proto::kind_name(kind) + ", got " + proto::kind_name(m.kind));
    if (m.kind != proto::Kind::Hello && m.pair_id != pair_id)
      throw ProtocolFault("pair id mismatch from " + role_);
    return m;
  }

  void set_role(std::string role) { role_ = std::move(role); }
  const std::string& role() const { return role_; }

 private:
  void log(const char* dir, const proto::Message& m) {
    if (!transcript_) return;
    nlohmann::json j;
    j["t"] = mono_ns();
    j["dir"] = dir;
    j["role"] = role_;
    j["msg"] = nlohmann::json::parse(m.encode());
    *transcript_ << j.dump() << '\n';
  }

  net::Connection conn_;
  std::ostream* transcript_;
  std::string role_;
};

}  // namespace detail

inline SessionScore score_runs(std::vector<TrialResult> runs) {
  SessionScore score;
  std::uint64_t violated = 0;
  double ac_sum = 0.0;
  std::uint64_t ac_count = 0;
  bool all_perfect = true;
  for (const auto& r : runs) {
    if (r.bell.violated) ++violated;
    if (r.anticorr) {
      ac_sum += r.anticorr->percent;
      ++ac_count;
      if (!r.anticorr->perfect) all_perfect = false;
    } else {
      all_perfect = false;
    }
  }
  score.bell_violation_rate =
      runs.empty() ? 0.0 : static_cast<double>(violated) / static_cast<double>(runs.size());
  score.mean_anticorr_pct = ac_count ? ac_sum / static_cast<double>(ac_count) : 0.0;
  score.quantum_like = score.bell_violation_rate >= 0.99 && all_perfect && !runs.empty();
  score.verdict = score.quantum_like ? "quantum-like" : "not quantum-like";
  score.run_results = std::move(runs);
  return score;
}

// Runs a full session over three established station connections (however
// they were made: stations dialing the referee's listener, or the referee
// dialing listening stations). Each station opens with HELLO naming its
// role; the referee routes by role from then on.
inline SessionScore referee_session(std::vector<net::Connection> conns,
                                    const SessionConfig& cfg) {
  if (cfg.n < 1 || cfg.runs < 1) throw std::invalid_argument("need n >= 1 and runs >= 1");
  if (conns.size() != 3) throw std::invalid_argument("need exactly three station connections");

  std::map<std::string, detail::RefereeLink> links;
  for (auto& conn : conns) {
    detail::RefereeLink link(std::move(conn), cfg.transcript);
    const proto::Message hello = link.expect(proto::Kind::Hello, 0, cfg.timeout_ms());
    if (hello.role != "source" && hello.role != "alice" && hello.role != "bob")
      throw ProtocolFault("unknown station role: " + hello.role);
    link.set_role(hello.role);
    if (!links.emplace(hello.role, std::move(link)).second)
      throw ProtocolFault("duplicate station role: " + hello.role);
  }
  auto& source = links.at("source");
  auto& alice = links.at("alice");
  auto& bob = links.at("bob");

  auto fault_all = [&](const std::string& reason) {
    proto::Message f;
    f.kind = proto::Kind::Fault;
    f.reason = reason;
    for (auto& [role, link] : links) {
      try {
        link.send(f);
      } catch (...) {
      }
    }
  };

  try {
    {
      proto::Message ack;
      ack.kind = proto::Kind::Hello;
      ack.role = "referee";
      ack.info = {{"n", cfg.n}, {"runs", cfg.runs}};
      for (auto& [role, link] : links) link.send(ack);
    }

    std::vector<TrialResult> results;
    results.reserve(cfg.runs);
    for (std::uint64_t run = 0; run < cfg.runs; ++run) {
      RngStream angle_rng{trial_key(cfg.master_seed, cfg.n, run).derive(kAngleStream)};
      Tally t;
      for (std::uint64_t j = 0; j < cfg.n; ++j) {
        proto::Message prep;
        prep.kind = proto::Kind::Prepare;
        prep.pair_id = j;
        source.send(prep);

        // two opaque payloads from the source, one per station
        std::optional<proto::Message> for_alice, for_bob;
        for (int k = 0; k < 2; ++k) {
          proto::Message hv = source.expect(proto::Kind::Hv, j, cfg.timeout_ms());
          if (hv.role == "alice" && !for_alice) for_alice = std::move(hv);
          else if (hv.role == "bob" && !for_bob) for_bob = std::move(hv);
          else throw ProtocolFault("source addressed payload badly: role " + hv.role);
        }
        alice.send(*for_alice);
        bob.send(*for_bob);
        alice.expect(proto::Kind::HvAck, j, cfg.timeout_ms());
        bob.expect(proto::Kind::HvAck, j, cfg.timeout_ms());

        // only now do angle choices come into existence
        const AngleSetting setting = draw_setting(angle_rng);
        proto::Message angle;
        angle.kind = proto::Kind::Angle;
        angle.pair_id = j;
        angle.code = setting.a;
        alice.send(angle);
        angle.code = setting.b;
        bob.send(angle);

        const proto::Message out_a = alice.expect(proto::Kind::Outcome, j, cfg.timeout_ms());
        const proto::Message out_b = bob.expect(proto::Kind::Outcome, j, cfg.timeout_ms());
        if ((out_a.bit != 0 && out_a.bit != 1) || (out_b.bit != 0 && out_b.bit != 1))
          throw ProtocolFault("outcome is not a bit");
        t.add(PairRecord{j, setting, out_a.bit, out_b.bit});
      }
      proto::Message done;
      done.kind = proto::Kind::RunDone;
      for (auto& [role, link] : links) link.send(done);
      results.push_back(evaluate(t));
    }

    SessionScore score = score_runs(std::move(results));
    proto::Message fin;
    fin.kind = proto::Kind::Score;
    fin.info = {{"bell_violation_rate", score.bell_violation_rate},
                {"mean_anticorr_pct", score.mean_anticorr_pct},
                {"verdict", score.verdict}};
    for (auto& [role, link] : links) link.send(fin);
    return score;
  } catch (const ProtocolFault& e) {
    fault_all(e.what());
    throw;
  }
}

inline SessionScore referee_session(net::Listener& listener, const SessionConfig& cfg) {
  std::vector<net::Connection> conns;
  for (int i = 0; i < 3; ++i) conns.push_back(listener.accept(cfg.timeout_ms()));
  return referee_session(std::move(conns), cfg);
}

// external-contender mode: the stations listen, the referee dials them
inline SessionScore referee_session_dial(const std::vector<std::string>& endpoints,
                                         const SessionConfig& cfg) {
  std::vector<net::Connection> conns;
  for (const auto& ep : endpoints) conns.push_back(net::Connection::dial(ep));
  return referee_session(std::move(conns), cfg);
}

}  // namespace epr
