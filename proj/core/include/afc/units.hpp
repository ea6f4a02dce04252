#pragma once

#include <numbers>

// Internal frequencies are angular (rad/s). Everything user-facing is in Hz
// or MHz and is converted with the helpers below at the boundary.
namespace afc::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double atmosphere = 101325.0;         // Pa

inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double ns = 1e-9;
inline constexpr double us = 1e-6;
inline constexpr double ps = 1e-12;
inline constexpr double mW = 1e-3;
inline constexpr double uW = 1e-6;
inline constexpr double mm = 1e-3;
inline constexpr double cm = 1e-2;
inline constexpr double nm = 1e-9;

constexpr double hz_to_angular(double hz) { return two_pi * hz; }
constexpr double angular_to_hz(double w) { return w / two_pi; }
constexpr double mhz_to_angular(double mhz) { return two_pi * mhz * MHz; }
constexpr double angular_to_mhz(double w) { return w / (two_pi * MHz); }
constexpr double celsius_to_kelvin(double c) { return c + 273.15; }
constexpr double kelvin_to_celsius(double k) { return k - 273.15; }

}  // namespace afc::units
