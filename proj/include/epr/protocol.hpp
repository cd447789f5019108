#pragma once

// Wire protocol for the locality-enforcing referee: newline-delimited JSON
// envelopes. Field reference (absent fields are omitted from the envelope):
//
//   kind    one of HELLO, PREPARE, HV, HV_ACK, ANGLE, OUTCOME, RUN_DONE,
//           SCORE, FAULT
//   role    "source" | "alice" | "bob"; sent in HELLO to identify the
//           station, and on HV from the source to address a payload
//   pair    pair index within the current run
//   payload base64-encoded opaque bytes (HV only); the referee forwards it
//           untouched and never interprets it
//   code    angle code (ANGLE only): 0 or 3 toward Alice, 0 or 2 toward Bob
//   bit     measurement outcome, 0 or 1 (OUTCOME only)
//   reason  human-readable diagnostic (FAULT only)
//   info    free-form JSON object (HELLO session parameters, SCORE summary)
//
// Per-pair order: PREPARE -> HV (both payloads) -> HV_ACK (both stations) ->
// ANGLE (both) -> OUTCOME (both). Angles are never revealed before both
// HV_ACKs are in.

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace epr::proto {

enum class Kind { Hello, Prepare, Hv, HvAck, Angle, Outcome, RunDone, Score, Fault };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Hello: return "HELLO";
    case Kind::Prepare: return "PREPARE";
    case Kind::Hv: return "HV";
    case Kind::HvAck: return "HV_ACK";
    case Kind::Angle: return "ANGLE";
    case Kind::Outcome: return "OUTCOME";
    case Kind::RunDone: return "RUN_DONE";
    case Kind::Score: return "SCORE";
    case Kind::Fault: return "FAULT";
  }
  return "?";
}

inline Kind kind_from_name(const std::string& name) {
  if (name == "HELLO") return Kind::Hello;
  if (name == "PREPARE") return Kind::Prepare;
  if (name == "HV") return Kind::Hv;
  if (name == "HV_ACK") return Kind::HvAck;
  if (name == "ANGLE") return Kind::Angle;
  if (name == "OUTCOME") return Kind::Outcome;
  if (name == "RUN_DONE") return Kind::RunDone;
  if (name == "SCORE") return Kind::Score;
  if (name == "FAULT") return Kind::Fault;
  throw std::invalid_argument("unknown message kind: " + name);
}

inline std::string base64_encode(const std::string& bytes) {
  static constexpr char table[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                            (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                            static_cast<std::uint8_t>(bytes[i + 2]);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back(table[v & 63]);
  }
  const std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    const std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out += "==";
  } else if (rem == 2) {
    const std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                            (static_cast<std::uint8_t>(bytes[i + 1]) << 8);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::string base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=') break;
    const int v = value_of(c);
    if (v < 0) throw std::invalid_argument("malformed base64 payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

struct Message {
  Kind kind{Kind::Hello};
  std::string role;     // HELLO, HV routing
  std::uint64_t pair_id{0};
  std::string payload;  // decoded bytes
  int code{0};
  int bit{0};
  std::string reason;
  nlohmann::json info;

  std::string encode() const {
    nlohmann::json j;
    j["kind"] = kind_name(kind);
    switch (kind) {
      case Kind::Hello:
        j["role"] = role;
        if (!info.is_null()) j["info"] = info;
        break;
      case Kind::Prepare:
      case Kind::HvAck:
        j["pair"] = pair_id;
        break;
      case Kind::Hv:
        j["pair"] = pair_id;
        j["role"] = role;
        j["payload"] = base64_encode(payload);
        break;
      case Kind::Angle:
        j["pair"] = pair_id;
        j["code"] = code;
        break;
      case Kind::Outcome:
        j["pair"] = pair_id;
        j["bit"] = bit;
        break;
      case Kind::RunDone:
        break;
      case Kind::Score:
        j["info"] = info;
        break;
      case Kind::Fault:
        j["reason"] = reason;
        break;
    }
    return j.dump();
  }

  static Message decode(const std::string& line) {
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, true);
    Message m;
    m.kind = kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("role")) m.role = j["role"].get<std::string>();
    if (j.contains("pair")) m.pair_id = j["pair"].get<std::uint64_t>();
    if (j.contains("payload")) m.payload = base64_decode(j["payload"].get<std::string>());
    if (j.contains("code")) m.code = j["code"].get<int>();
    if (j.contains("bit")) m.bit = j["bit"].get<int>();
    if (j.contains("reason")) m.reason = j["reason"].get<std::string>();
    if (j.contains("info")) m.info = j["info"];
    return m;
  }
};

}  // namespace epr::proto
