#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

#include "gridledger/crypto.hpp"

namespace gridledger {

// Seeded random stream with platform-stable output. std::mt19937_64 has a
// standardised sequence; the standard distributions do not, so bounded draws
// use rejection sampling here. Every draw carries a label and is reported to
// the observer, which lets a simulation trace show where randomness went.
class DeterministicRng {
 public:
  using Observer = std::function<void(std::string_view label, std::uint64_t value)>;

  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  std::uint64_t next(std::string_view label);
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound, std::string_view label);
  Seed seed(std::string_view label);
  Bytes bytes(std::size_t n, std::string_view label);

 private:
  std::uint64_t raw() { return engine_(); }

  std::mt19937_64 engine_;
  Observer observer_;
};

}  // namespace gridledger
