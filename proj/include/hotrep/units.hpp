#pragma once

#include <numbers>

namespace hotrep {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, vacuum

namespace units {
inline constexpr double Hz = 1.0;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double s = 1.0;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
inline constexpr double m = 1.0;
inline constexpr double mm = 1e-3;
inline constexpr double km = 1e3;
}  // namespace units

}  // namespace hotrep
