#pragma once

/**
 * @file pass_model.hpp
 * @brief Closed-form constraints for a safe-pass advisory on a two-lane road.
 *
 * A host car follows a truck at speed v1 while an oncoming car approaches in
 * the opposite lane. Passing needs the host to gain
 *
 *     gap = 2*headway + car_length + truck_length
 *
 * of longitudinal displacement relative to the truck. After subtracting the
 * distance travelled during the driver's reaction time, the remaining gap is
 * covered under constant acceleration a_max:
 *
 *     min_time  = sqrt(2 * (gap - reaction_time * v1) / a_max)
 *     min_range = gap + safety_margin + 2 * v1 * min_time
 *
 * The advisory is feasible only when the radio range available for detecting
 * the oncoming car strictly exceeds min_range.
 *
 * All quantities are SI (meters, seconds, meters/second).
 */

#include <cmath>
#include <string>

#include "passfeas/errors.hpp"

namespace passfeas {

struct PassScenario {
    double v1{0.0};             // host car and truck speed, m/s
    double v2{0.0};             // oncoming car speed, m/s
    double headway{0.0};        // gap between host and truck, m
    double reaction_time{0.0};  // s
    double car_length{0.0};     // m
    double truck_length{0.0};   // m
    double safety_margin{0.0};  // post-pass safety distance, m
    double max_accel{0.0};      // m/s^2 at the scenario speed

    /// Throws ValidationError naming the first violated field invariant.
    void validate() const
    {
        auto positive = [](double value, const char* name) {
            if (!std::isfinite(value) || !(value > 0.0)) {
                throw ValidationError(std::string("PassScenario.") + name + " must be finite and > 0");
            }
        };
        auto non_negative = [](double value, const char* name) {
            if (!std::isfinite(value) || !(value >= 0.0)) {
                throw ValidationError(std::string("PassScenario.") + name + " must be finite and >= 0");
            }
        };
        positive(v1, "v1");
        positive(v2, "v2");
        non_negative(headway, "headway");
        positive(reaction_time, "reaction_time");
        positive(car_length, "car_length");
        positive(truck_length, "truck_length");
        non_negative(safety_margin, "safety_margin");
        positive(max_accel, "max_accel");
    }

    /// Relative displacement the host must gain on the truck to complete the pass.
    [[nodiscard]] double clearance_gap() const noexcept
    {
        return 2.0 * headway + car_length + truck_length;
    }

    [[nodiscard]] double closing_speed() const noexcept { return v1 + v2; }

    friend bool operator==(const PassScenario&, const PassScenario&) = default;
};

struct ManeuverBounds {
    double min_time{0.0};   // s
    double min_range{0.0};  // m
};

/// Minimum maneuver time. Throws DomainError when the reaction-time travel
/// already exceeds the clearance gap.
[[nodiscard]] inline double min_pass_time(const PassScenario& s)
{
    s.validate();
    const double accel_gap = s.clearance_gap() - s.reaction_time * s.v1;
    if (accel_gap < 0.0) {
        throw DomainError("reaction-time travel " + std::to_string(s.reaction_time * s.v1) +
                          " m exceeds the clearance gap " + std::to_string(s.clearance_gap()) +
                          " m; the maneuver-time closed form has no real solution");
    }
    return std::sqrt(2.0 * accel_gap / s.max_accel);
}

/// Minimum communication range needed to warn the host in time.
[[nodiscard]] inline double min_comm_range(const PassScenario& s)
{
    const double time = min_pass_time(s);
    return s.clearance_gap() + s.safety_margin + 2.0 * s.v1 * time;
}

[[nodiscard]] inline ManeuverBounds maneuver_bounds(const PassScenario& s)
{
    const double time = min_pass_time(s);
    return {time, s.clearance_gap() + s.safety_margin + 2.0 * s.v1 * time};
}

enum class Verdict { SafePassFeasible, Infeasible, Unknown };

/// Which constraint decided the verdict.
enum class BindingConstraint { None, Range, Time, LinkLost, NoContact, Domain };

struct AdvisoryVerdict {
    Verdict verdict{Verdict::Unknown};
    BindingConstraint binding{BindingConstraint::None};
    // Shortfall against the binding constraint: meters for Range, seconds for Time.
    double deficit{0.0};
    std::string cause;

    [[nodiscard]] bool feasible() const noexcept { return verdict == Verdict::SafePassFeasible; }

    friend bool operator==(const AdvisoryVerdict&, const AdvisoryVerdict&) = default;
};

[[nodiscard]] constexpr const char* to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::SafePassFeasible: return "SafePassFeasible";
    case Verdict::Infeasible: return "Infeasible";
    case Verdict::Unknown: return "Unknown";
    }
    return "?";
}

[[nodiscard]] constexpr const char* to_string(BindingConstraint b) noexcept
{
    switch (b) {
    case BindingConstraint::None: return "none";
    case BindingConstraint::Range: return "range";
    case BindingConstraint::Time: return "time";
    case BindingConstraint::LinkLost: return "link_lost";
    case BindingConstraint::NoContact: return "no_contact";
    case BindingConstraint::Domain: return "domain";
    }
    return "?";
}

/// Range-budget check: feasible iff min_comm_range < available_range (strict).
/// DomainError is folded into an Unknown verdict; ValidationError propagates.
[[nodiscard]] inline AdvisoryVerdict feasibility(const PassScenario& s, double available_range)
{
    if (!(available_range >= 0.0)) {
        throw ValidationError("available_range must be >= 0");
    }
    double required = 0.0;
    try {
        required = min_comm_range(s);
    } catch (const DomainError& e) {
        return {Verdict::Unknown, BindingConstraint::Domain, 0.0, e.what()};
    }
    if (required < available_range) {
        return {Verdict::SafePassFeasible, BindingConstraint::None, 0.0, {}};
    }
    return {Verdict::Infeasible, BindingConstraint::Range, required - available_range,
            "available range does not exceed the required communication range"};
}

} // namespace passfeas
