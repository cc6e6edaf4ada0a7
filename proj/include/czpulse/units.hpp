#pragma once

#include <numbers>

// Internal convention: angular frequency in rad/ns, time in ns.
// External I/O is ordinary frequency in GHz (or MHz where noted).
namespace czpulse {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double ghz_to_rad(double ghz) noexcept { return kTwoPi * ghz; }
constexpr double rad_to_ghz(double rad_per_ns) noexcept { return rad_per_ns / kTwoPi; }
constexpr double mhz_to_rad(double mhz) noexcept { return kTwoPi * mhz * 1e-3; }
constexpr double rad_to_mhz(double rad_per_ns) noexcept { return rad_per_ns / kTwoPi * 1e3; }

}  // namespace czpulse
