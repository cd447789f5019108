#pragma once

#include <stdexcept>

#include "epr/core.hpp"
#include "epr/rng.hpp"

namespace epr {

// The three hidden bits (A3, B0, B2) that fully prescribe a local model's
// responses. A0 is forced to 1 - B0 by anti-correlation.
struct HvTriple {
  int a3{0};
  int b0{0};
  int b2{0};

  bool operator==(const HvTriple&) const = default;
};

// pair class i = A3 B0 B2 read as a binary number
inline int class_index(HvTriple hv) { return 4 * hv.a3 + 2 * hv.b0 + hv.b2; }

// Three independent fair bits, drawn a3, b0, b2 in order.
inline HvTriple hv_random(RngStream& rng) {
  HvTriple hv;
  hv.a3 = rng.coin();
  hv.b0 = rng.coin();
  hv.b2 = rng.coin();
  return hv;
}

// Flips A3 for classes 2 and 5, emptying them (2 -> 6, 5 -> 1). Saturates the
// Bell inequality into an expected equality. Idempotent.
inline HvTriple saturate(HvTriple hv) {
  const int i = class_index(hv);
  if (i == 2 || i == 5) hv.a3 = 1 - hv.a3;
  return hv;
}

// A prepared pair carries its class index as computed BEFORE any saturating
// transformation; the cheat keys on that original class, not the current one.
struct PreparedPair {
  HvTriple hv{};
  int original_class{0};
};

// Honest readout: a=0 reads 1-B0, a=3 reads A3. The cheat misreports
// A0 = B0 when the original class is 1 (so pairs that reached class 1 via
// saturation of class 5 stay honest).
inline int measure_alice(const PreparedPair& pair, int a, bool cheat) {
  if (a == 0) {
    if (cheat && pair.original_class == 1) return pair.hv.b0;
    return 1 - pair.hv.b0;
  }
  if (a == 3) return pair.hv.a3;
  throw std::invalid_argument("alice code must be 0 or 3");
}

inline int measure_bob(const PreparedPair& pair, int b) {
  if (b == 0) return pair.hv.b0;
  if (b == 2) return pair.hv.b2;
  throw std::invalid_argument("bob code must be 0 or 2");
}

// Preparation per variant: BellRandom keeps the raw triple; Saturated and
// Cheating saturate it (the cheat itself happens at measurement time).
inline PreparedPair prepare_pair(const ModelSpec& model, RngStream& rng) {
  switch (model.variant) {
    case ModelVariant::BellRandom: {
      const HvTriple hv = hv_random(rng);
      return PreparedPair{hv, class_index(hv)};
    }
    case ModelVariant::Saturated:
    case ModelVariant::Cheating: {
      const HvTriple hv = hv_random(rng);
      return PreparedPair{saturate(hv), class_index(hv)};
    }
    case ModelVariant::Quantum:
    case ModelVariant::External:
      throw std::invalid_argument("model is not a hidden-variable preparation");
  }
  throw std::invalid_argument("bad model variant");
}

inline bool is_hv_variant(ModelVariant v) {
  return v == ModelVariant::BellRandom || v == ModelVariant::Saturated ||
         v == ModelVariant::Cheating;
}

inline bool cheats_at_measurement(ModelVariant v) { return v == ModelVariant::Cheating; }

}  // namespace epr
