#pragma once

// Reference station adapters: wrap the in-process hidden-variable models
// behind the wire protocol. The source serializes the triple plus its
// original class into the payload; the measurement stations deserialize and
// apply the same readout functions as the in-process path.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "epr/hv.hpp"
#include "epr/montecarlo.hpp"
#include "epr/net.hpp"
#include "epr/protocol.hpp"

namespace epr {

enum class StationRole { Source, Alice, Bob };

inline StationRole station_role_from_name(const std::string& name) {
  if (name == "source") return StationRole::Source;
  if (name == "alice") return StationRole::Alice;
  if (name == "bob") return StationRole::Bob;
  throw std::invalid_argument("role must be source, alice, or bob");
}

inline const char* station_role_name(StationRole r) {
  switch (r) {
    case StationRole::Source: return "source";
    case StationRole::Alice: return "alice";
    case StationRole::Bob: return "bob";
  }
  return "?";
}

struct StationConfig {
  StationRole role{StationRole::Source};
  ModelVariant model{ModelVariant::BellRandom};
  std::string referee_endpoint;  // dial mode: address of the referee's listener
  std::string listen_endpoint;   // listen mode: accept one referee connection here
  std::uint64_t seed{0};
  int timeout_ms{30000};
  // test hook: reply OUTCOME straight after the payload, before any ANGLE
  bool misbehave_early_outcome{false};
};

// The quantum oracle needs the joint relative angle, which no single station
// ever learns; it cannot be wrapped as a contender. Rejected at
// configuration time.
inline void validate_station_model(ModelVariant v) {
  if (!is_hv_variant(v))
    throw std::invalid_argument(
        "only hidden-variable models (bell-random, saturated, cheating) can "
        "play as stations");
}

inline std::string encode_hv_payload(const PreparedPair& pair) {
  nlohmann::json j;
  j["a3"] = pair.hv.a3;
  j["b0"] = pair.hv.b0;
  j["b2"] = pair.hv.b2;
  j["oc"] = pair.original_class;
  return j.dump();
}

inline PreparedPair decode_hv_payload(const std::string& payload) {
  const nlohmann::json j = nlohmann::json::parse(payload);
  PreparedPair pair;
  pair.hv.a3 = j.at("a3").get<int>();
  pair.hv.b0 = j.at("b0").get<int>();
  pair.hv.b2 = j.at("b2").get<int>();
  pair.original_class = j.at("oc").get<int>();
  return pair;
}

// Dials the referee, plays the configured role until SCORE or FAULT.
// Returns true on a clean SCORE, false if the referee faulted the session.
inline bool run_station(const StationConfig& cfg) {
  validate_station_model(cfg.model);
  net::Connection conn;
  if (!cfg.listen_endpoint.empty()) {
    const auto [host, port] = net::split_endpoint(cfg.listen_endpoint);
    net::Listener listener(host, port);
    conn = listener.accept(cfg.timeout_ms);
  } else {
    conn = net::Connection::dial(cfg.referee_endpoint);
  }

  auto send = [&](const proto::Message& m) { conn.send_line(m.encode()); };
  auto recv = [&] { return proto::Message::decode(conn.recv_line(cfg.timeout_ms)); };

  proto::Message hello;
  hello.kind = proto::Kind::Hello;
  hello.role = station_role_name(cfg.role);
  send(hello);

  const proto::Message ack = recv();
  if (ack.kind == proto::Kind::Fault) return false;
  if (ack.kind != proto::Kind::Hello) throw std::runtime_error("expected referee HELLO");
  const auto n = ack.info.at("n").get<std::uint64_t>();

  std::uint64_t run = 0;
  const ModelSpec model{cfg.model, {}, {}, {}};
  RngStream prep_rng{trial_key(cfg.seed, n, run).derive(kModelStream)};
  PreparedPair current{};

  for (;;) {
    const proto::Message m = recv();
    switch (m.kind) {
      case proto::Kind::Prepare: {
        if (cfg.role != StationRole::Source)
          throw std::runtime_error("PREPARE sent to a measurement station");
        const PreparedPair pair = prepare_pair(model, prep_rng);
        proto::Message hv;
        hv.kind = proto::Kind::Hv;
        hv.pair_id = m.pair_id;
        hv.payload = encode_hv_payload(pair);
        hv.role = "alice";
        send(hv);
        hv.role = "bob";
        send(hv);
        break;
      }
      case proto::Kind::Hv: {
        current = decode_hv_payload(m.payload);
        if (cfg.misbehave_early_outcome) {
          // jumps the gun: outcome before any angle was revealed
          proto::Message out;
          out.kind = proto::Kind::Outcome;
          out.pair_id = m.pair_id;
          out.bit = 0;
          send(out);
          break;
        }
        proto::Message hv_ack;
        hv_ack.kind = proto::Kind::HvAck;
        hv_ack.pair_id = m.pair_id;
        send(hv_ack);
        break;
      }
      case proto::Kind::Angle: {
        proto::Message out;
        out.kind = proto::Kind::Outcome;
        out.pair_id = m.pair_id;
        if (cfg.role == StationRole::Alice)
          out.bit = measure_alice(current, m.code, cheats_at_measurement(cfg.model));
        else if (cfg.role == StationRole::Bob)
          out.bit = measure_bob(current, m.code);
        else
          throw std::runtime_error("ANGLE sent to the source");
        send(out);
        break;
      }
      case proto::Kind::RunDone:
        ++run;
        prep_rng = RngStream{trial_key(cfg.seed, n, run).derive(kModelStream)};
        break;
      case proto::Kind::Score:
        return true;
      case proto::Kind::Fault:
        return false;
      default:
        throw std::runtime_error(std::string("unexpected message: ") +
                                 proto::kind_name(m.kind));
    }
  }
}

}  // namespace epr
