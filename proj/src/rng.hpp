#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "constants.hpp"

namespace cpcal {

// Seedable standard-normal stream with a fully pinned algorithm so datasets
// are bit-reproducible across platforms: MT19937-64 (whose output sequence
// the C++ standard fixes exactly) feeding a Box-Muller transform. Each pair
// of engine draws yields (r cos, r sin); the sin value is cached, so the
// engine consumption per normal is fixed and independent of noise amplitudes.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

  // One standard-normal deviate.
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Radius uniform mapped into (0,1] so the log never sees 0; angle in [0,1).
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * constants::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpcal
