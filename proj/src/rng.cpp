#include "gridledger/rng.hpp"

#include <stdexcept>

namespace gridledger {

std::uint64_t DeterministicRng::next(std::string_view label) {
  const auto v = raw();
  if (observer_) observer_(label, v);
  return v;
}

std::uint64_t DeterministicRng::uniform(std::uint64_t bound, std::string_view label) {
  if (bound == 0) {
    throw std::invalid_argument("uniform bound must be positive");
  }
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t v;
  do {
    v = raw();
  } while (v >= limit);
  v %= bound;
  if (observer_) observer_(label, v);
  return v;
}

Seed DeterministicRng::seed(std::string_view label) {
  Seed s;
  for (std::size_t i = 0; i < 4; ++i) {
    auto v = raw();
    for (std::size_t b = 0; b < 8; ++b) s.value[i * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  if (observer_) observer_(label, s.value[0]);
  return s;
}

Bytes DeterministicRng::bytes(std::size_t n, std::string_view label) {
  Bytes out(n);
  for (std::size_t i = 0; i < n; i += 8) {
    auto v = raw();
    for (std::size_t b = 0; b < 8 && i + b < n; ++b) out[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  if (observer_) observer_(label, n);
  return out;
}

}  // namespace gridledger
