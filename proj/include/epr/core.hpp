#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "epr/rng.hpp"

namespace epr {

// Alice's analyzer code a in {0,3} (angle a*pi/8), Bob's b in {0,2}.
// Angles live as integer codes only; all dispatch compares integers.
struct AngleSetting {
  int a{0};
  int b{0};

  static AngleSetting checked(int a, int b) {
    if (a != 0 && a != 3) throw std::invalid_argument("alice code must be 0 or 3");
    if (b != 0 && b != 2) throw std::invalid_argument("bob code must be 0 or 2");
    return AngleSetting{a, b};
  }

  bool operator==(const AngleSetting&) const = default;
};

struct SettingConfig {
  int d{0};           // |b - a| in {0,1,2,3}
  int delta_code{0};  // b - a in {0,-1,2,-3}; delta = delta_code * pi/8
};

// Maps the four legal settings bijectively onto configurations:
// (0,0)->0, (3,2)->1, (0,2)->2, (3,0)->3.
inline SettingConfig config_of(AngleSetting s) {
  AngleSetting::checked(s.a, s.b);
  const int delta = s.b - s.a;
  return SettingConfig{delta < 0 ? -delta : delta, delta};
}

inline double delta_radians(AngleSetting s) {
  return static_cast<double>(config_of(s).delta_code) * std::numbers::pi / 8.0;
}

struct PairRecord {
  std::uint64_t pair_id{0};
  AngleSetting setting{};
  int alice{0};  // outcome bit A
  int bob{0};    // outcome bit B
};

enum class ModelVariant { Quantum, BellRandom, Saturated, Cheating, External };

struct ModelSpec {
  ModelVariant variant{ModelVariant::Quantum};
  // transport addresses for External contenders: source, alice, bob
  std::string source_endpoint;
  std::string alice_endpoint;
  std::string bob_endpoint;

  static ModelSpec quantum() { return {ModelVariant::Quantum, {}, {}, {}}; }
  static ModelSpec bell_random() { return {ModelVariant::BellRandom, {}, {}, {}}; }
  static ModelSpec saturated() { return {ModelVariant::Saturated, {}, {}, {}}; }
  static ModelSpec cheating() { return {ModelVariant::Cheating, {}, {}, {}}; }
};

inline const char* model_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::Quantum: return "quantum";
    case ModelVariant::BellRandom: return "bell-random";
    case ModelVariant::Saturated: return "saturated";
    case ModelVariant::Cheating: return "cheating";
    case ModelVariant::External: return "external";
  }
  return "?";
}

inline ModelVariant model_from_name(const std::string& name) {
  if (name == "quantum") return ModelVariant::Quantum;
  if (name == "bell-random") return ModelVariant::BellRandom;
  if (name == "saturated") return ModelVariant::Saturated;
  if (name == "cheating") return ModelVariant::Cheating;
  throw std::invalid_argument("unknown model: " + name);
}

struct RunConfig {
  std::uint64_t n{800};  // total photon pairs
  std::uint64_t seed{0};
  ModelSpec model{};
};

// Draw order is pinned: Alice's code first, then Bob's.
inline AngleSetting draw_setting(RngStream& rng) {
  const int a = rng.coin() ? 3 : 0;
  const int b = rng.coin() ? 2 : 0;
  return AngleSetting{a, b};
}

// sin^2(delta) per configuration d, exact values (delta_d = 0, -pi/8, pi/4, -3pi/8)
inline double equal_probability(int d) {
  switch (d) {
    case 0: return 0.0;
    case 1: return 0.5 - std::numbers::sqrt2 / 4.0;  // sin^2(pi/8)
    case 2: return 0.5;
    case 3: return 0.5 + std::numbers::sqrt2 / 4.0;  // sin^2(3pi/8)
  }
  throw std::invalid_argument("config index out of range");
}

struct Outcome {
  int alice{0};
  int bob{0};
};

// Quantum pair source: A is a fair coin, B equals A with probability
// sin^2(delta). Two draws per pair, Alice first.
inline Outcome quantum_measure(RngStream& rng, AngleSetting setting) {
  const int d = config_of(setting).d;
  const int a_bit = rng.coin();
  const int b_bit = rng.bernoulli(equal_probability(d)) ? a_bit : 1 - a_bit;
  return Outcome{a_bit, b_bit};
}

}  // namespace epr
