#pragma once

#include <numbers>

namespace sawqed {

// Every frequency or rate crossing a public interface is an ordinary frequency
// in Hz. Angular values only exist inside integrators.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double angular(double hz) { return kTwoPi * hz; }

}  // namespace sawqed
