#pragma once

namespace zeropi::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;              // J s

// e^2 / (2 * 1 fF) / h in GHz, about 19.370
inline constexpr double charging_ghz_per_inverse_ff =
    elementary_charge * elementary_charge / (2.0 * 1e-15) / planck * 1e-9;

// 2e / h in GHz per volt
inline constexpr double two_e_over_h_ghz_per_volt = 2.0 * elementary_charge / planck * 1e-9;

}  // namespace zeropi::units
