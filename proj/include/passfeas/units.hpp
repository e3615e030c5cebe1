#pragma once

#include <string_view>

#include "passfeas/errors.hpp"

namespace passfeas::units {

// Exact by definition of the international mile.
inline constexpr double kMetersPerSecondPerMph = 0.44704;

constexpr double mph_to_mps(double mph) noexcept { return mph * kMetersPerSecondPerMph; }
constexpr double mps_to_mph(double mps) noexcept { return mps / kMetersPerSecondPerMph; }

/// Converts a speed tagged with "mph" or "mps" to meters/second.
inline double speed_to_mps(double value, std::string_view unit)
{
    if (unit == "mps") {
        return value;
    }
    if (unit == "mph") {
        return mph_to_mps(value);
    }
    throw ValidationError("unknown speed unit '" + std::string(unit) + "' (expected \"mph\" or \"mps\")");
}

} // namespace passfeas::units
