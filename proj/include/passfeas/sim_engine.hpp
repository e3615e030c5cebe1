#pragma once

/**
 * @file sim_engine.hpp
 * @brief Discrete-time replay of a two-lane overtaking encounter.
 *
 * The host car trails a truck eastbound at v1; an oncoming car drives
 * westbound at v2 in the other lane. Every beacon tick the host and the
 * oncoming car exchange one beacon each way through the channel model (and
 * optionally through the truck as a relay). The first beacon the host
 * receives from the oncoming car triggers the advisory decision.
 *
 * Positions are computed from the step index, so the trajectory is exact
 * constant-speed kinematics with no accumulated rounding.
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "passfeas/channel_model.hpp"
#include "passfeas/errors.hpp"
#include "passfeas/pass_model.hpp"

namespace passfeas {

enum class VehicleId { Host, Truck, Oncoming };

[[nodiscard]] constexpr const char* to_string(VehicleId v) noexcept
{
    switch (v) {
    case VehicleId::Host: return "host";
    case VehicleId::Truck: return "truck";
    case VehicleId::Oncoming: return "oncoming";
    }
    return "?";
}

struct EncounterConfig {
    PassScenario scenario;
    ChannelModel channel;
    Placement placement{Placement::Rooftop};
    double initial_separation{0.0};  // host to oncoming at t = 0, m
    double beacon_interval{0.1};     // s
    double time_step{0.01};          // s
    double duration_limit{600.0};    // s
    std::uint64_t rng_seed{0};
    bool relay_enabled{false};
    int link_loss_threshold{3};      // consecutive silent beacon ticks

    /// Speed used to index the range table: the mean of both approach speeds.
    [[nodiscard]] double table_speed() const noexcept { return 0.5 * (scenario.v1 + scenario.v2); }

    /// Truck front minus host front at t = 0.
    [[nodiscard]] double truck_offset() const noexcept { return scenario.headway + scenario.truck_length; }

    [[nodiscard]] std::int64_t ticks_per_beacon() const noexcept
    {
        return static_cast<std::int64_t>(std::llround(beacon_interval / time_step));
    }

    /// Largest single-hop range applicable to the host/oncoming link.
    [[nodiscard]] double link_reach() const
    {
        const double speed = table_speed();
        return std::max(channel.max_range(placement, Direction::Forward, speed),
                        channel.max_range(placement, Direction::Backward, speed));
    }

    void validate() const
    {
        scenario.validate();
        if (!std::isfinite(time_step) || !(time_step > 0.0)) {
            throw ValidationError("EncounterConfig.time_step must be > 0");
        }
        if (!std::isfinite(beacon_interval) || beacon_interval < time_step) {
            throw ValidationError("EncounterConfig.beacon_interval must be >= time_step");
        }
        const double ratio = beacon_interval / time_step;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
            throw ValidationError("EncounterConfig.beacon_interval must be an integer multiple of time_step");
        }
        if (!std::isfinite(duration_limit) || !(duration_limit > 0.0)) {
            throw ValidationError("EncounterConfig.duration_limit must be > 0");
        }
        if (link_loss_threshold < 1) {
            throw ValidationError("EncounterConfig.link_loss_threshold must be >= 1");
        }
        if (!channel.table().has(placement, Direction::Forward) ||
            !channel.table().has(placement, Direction::Backward)) {
            throw ValidationError(std::string("channel calibration lacks forward and backward entries for placement ") +
                                  to_string(placement));
        }
        if (!std::isfinite(initial_separation) || !(initial_separation > 0.0)) {
            throw ValidationError("EncounterConfig.initial_separation must be > 0");
        }
        double needed = link_reach();
        if (relay_enabled) {
            needed += truck_offset();
        }
        if (!(initial_separation > needed)) {
            throw ValidationError("EncounterConfig.initial_separation " + std::to_string(initial_separation) +
                                  " m must exceed the channel reach " + std::to_string(needed) +
                                  " m to capture first contact");
        }
    }
};

struct EncounterState {
    std::int64_t step_index{0};
    double t{0.0};
    double host_pos{0.0};
    double truck_pos{0.0};
    double oncoming_pos{0.0};
    double host_speed{0.0};
    double oncoming_speed{0.0};

    friend bool operator==(const EncounterState&, const EncounterState&) = default;
};

[[nodiscard]] inline EncounterState state_at(const EncounterConfig& cfg, std::int64_t step_index)
{
    const double t = static_cast<double>(step_index) * cfg.time_step;
    const double v1 = cfg.scenario.v1;
    const double v2 = cfg.scenario.v2;
    return {step_index, t, v1 * t, cfg.truck_offset() + v1 * t, cfg.initial_separation - v2 * t, v1, v2};
}

[[nodiscard]] inline EncounterState initial_state(const EncounterConfig& cfg) { return state_at(cfg, 0); }

/// Constant-speed kinematics over one time_step.
[[nodiscard]] inline EncounterState step(const EncounterState& state, const EncounterConfig& cfg)
{
    return state_at(cfg, state.step_index + 1);
}

struct BeaconRecord {
    double t{0.0};
    VehicleId sender{VehicleId::Host};
    VehicleId receiver{VehicleId::Oncoming};
    double distance{0.0};  // end to end, m
    bool los{true};
    bool delivered{false};
    bool via_relay{false};

    friend bool operator==(const BeaconRecord&, const BeaconRecord&) = default;
};

/// Fired after link_loss_threshold consecutive silent beacon ticks.
struct LinkTimeout {
    double t{0.0};
};

using AdvisoryEvent = std::variant<BeaconRecord, LinkTimeout>;

enum class AdvisoryPhase { Idle, OncomingDetected, SafeToPass, DoNotPass };
enum class DoNotPassReason { None, RangeDeficit, TimeDeficit, LinkLost };

struct AdvisoryState {
    AdvisoryPhase phase{AdvisoryPhase::Idle};
    DoNotPassReason reason{DoNotPassReason::None};
    double first_contact_t{0.0};
    double first_contact_distance{0.0};

    [[nodiscard]] static AdvisoryState idle() { return {}; }

    friend bool operator==(const AdvisoryState&, const AdvisoryState&) = default;
};

[[nodiscard]] constexpr const char* to_string(DoNotPassReason r) noexcept
{
    switch (r) {
    case DoNotPassReason::None: return "None";
    case DoNotPassReason::RangeDeficit: return "RangeDeficit";
    case DoNotPassReason::TimeDeficit: return "TimeDeficit";
    case DoNotPassReason::LinkLost: return "LinkLost";
    }
    return "?";
}

[[nodiscard]] inline std::string to_string(const AdvisoryState& s)
{
    switch (s.phase) {
    case AdvisoryPhase::Idle: return "Idle";
    case AdvisoryPhase::OncomingDetected: return "OncomingDetected";
    case AdvisoryPhase::SafeToPass: return "SafeToPass";
    case AdvisoryPhase::DoNotPass: return std::string("DoNotPass(") + to_string(s.reason) + ")";
    }
    return "?";
}

/// Allowed edges: Idle -> OncomingDetected -> {SafeToPass | DoNotPass},
/// SafeToPass -> DoNotPass(LinkLost). Self loops are always allowed.
[[nodiscard]] inline bool is_legal_transition(const AdvisoryState& from, const AdvisoryState& to) noexcept
{
    if (from == to) {
        return true;
    }
    switch (from.phase) {
    case AdvisoryPhase::Idle:
        return to.phase == AdvisoryPhase::OncomingDetected;
    case AdvisoryPhase::OncomingDetected:
        return (to.phase == AdvisoryPhase::SafeToPass || to.phase == AdvisoryPhase::DoNotPass) &&
               to.first_contact_t == from.first_contact_t;
    case AdvisoryPhase::SafeToPass:
        return to.phase == AdvisoryPhase::DoNotPass && to.reason == DoNotPassReason::LinkLost;
    case AdvisoryPhase::DoNotPass:
        return false;
    }
    return false;
}

/**
 * Advisory state machine.
 *
 * A delivered oncoming-to-host beacon moves Idle to OncomingDetected. A second
 * application at detection evaluates the first-contact distance: it must
 * strictly exceed min_comm_range, and the closing time distance/(v1+v2) must
 * strictly exceed min_pass_time. When the scenario is outside the closed
 * form's domain the state stays OncomingDetected. A LinkTimeout while in
 * SafeToPass yields DoNotPass(LinkLost). DoNotPass is absorbing.
 */
[[nodiscard]] inline AdvisoryState advisory_transition(const AdvisoryState& current, const AdvisoryEvent& event,
                                                       const PassScenario& s)
{
    if (const auto* timeout = std::get_if<LinkTimeout>(&event)) {
        (void)timeout;
        if (current.phase == AdvisoryPhase::SafeToPass) {
            auto next = current;
            next.phase = AdvisoryPhase::DoNotPass;
            next.reason = DoNotPassReason::LinkLost;
            return next;
        }
        return current;
    }
    const auto& beacon = std::get<BeaconRecord>(event);
    if (!beacon.delivered || beacon.sender != VehicleId::Oncoming || beacon.receiver != VehicleId::Host) {
        return current;
    }
    switch (current.phase) {
    case AdvisoryPhase::Idle: {
        AdvisoryState next;
        next.phase = AdvisoryPhase::OncomingDetected;
        next.first_contact_t = beacon.t;
        next.first_contact_distance = beacon.distance;
        return next;
    }
    case AdvisoryPhase::OncomingDetected: {
        ManeuverBounds bounds;
        try {
            bounds = maneuver_bounds(s);
        } catch (const DomainError&) {
            return current;
        }
        auto next = current;
        const double distance = current.first_contact_distance;
        if (!(distance > bounds.min_range)) {
            next.phase = AdvisoryPhase::DoNotPass;
            next.reason = DoNotPassReason::RangeDeficit;
        } else if (!(distance / s.closing_speed() > bounds.min_time)) {
            next.phase = AdvisoryPhase::DoNotPass;
            next.reason = DoNotPassReason::TimeDeficit;
        } else {
            next.phase = AdvisoryPhase::SafeToPass;
        }
        return next;
    }
    case AdvisoryPhase::SafeToPass:
    case AdvisoryPhase::DoNotPass:
        return current;
    }
    return current;
}

struct AdvisoryStep {
    double t{0.0};
    AdvisoryState state;

    friend bool operator==(const AdvisoryStep&, const AdvisoryStep&) = default;
};

struct TimeInterval {
    double start{0.0};
    double end{0.0};

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

struct EncounterReport {
    std::optional<double> first_contact_distance;
    std::optional<double> first_contact_t;
    double connectivity_duration{0.0};
    std::int64_t connected_ticks{0};
    std::int64_t total_beacons_sent{0};
    std::int64_t total_beacons_delivered{0};
    std::vector<AdvisoryStep> advisory_trace;
    AdvisoryVerdict verdict;
    std::vector<BeaconRecord> beacons;
    // Beacon ticks on which terrain blocked the direct host/oncoming path.
    std::vector<TimeInterval> los_blocked;
    double los_blocked_duration{0.0};
    double simulated_duration{0.0};

    [[nodiscard]] const AdvisoryState& final_advisory() const { return advisory_trace.back().state; }

    friend bool operator==(const EncounterReport&, const EncounterReport&) = default;
};

/// Terminal advisory state mapped onto a verdict.
[[nodiscard]] inline AdvisoryVerdict to_verdict(const AdvisoryState& state, const PassScenario& s)
{
    switch (state.phase) {
    case AdvisoryPhase::Idle:
        return {Verdict::Unknown, BindingConstraint::NoContact, 0.0, "no beacon from the oncoming vehicle"};
    case AdvisoryPhase::OncomingDetected:
        return {Verdict::Unknown, BindingConstraint::Domain, 0.0,
                "scenario outside the maneuver model's domain; contact made but undecidable"};
    case AdvisoryPhase::SafeToPass:
        return {Verdict::SafePassFeasible, BindingConstraint::None, 0.0, {}};
    case AdvisoryPhase::DoNotPass:
        break;
    }
    switch (state.reason) {
    case DoNotPassReason::RangeDeficit:
        return {Verdict::Infeasible, BindingConstraint::Range, min_comm_range(s) - state.first_contact_distance,
                "first contact inside the required communication range"};
    case DoNotPassReason::TimeDeficit:
        return {Verdict::Infeasible, BindingConstraint::Time,
                min_pass_time(s) - state.first_contact_distance / s.closing_speed(),
                "closing time shorter than the minimum maneuver time"};
    case DoNotPassReason::LinkLost:
        return {Verdict::Infeasible, BindingConstraint::LinkLost, 0.0, "beacons lost before the pass"};
    case DoNotPassReason::None:
        break;
    }
    return {Verdict::Unknown, BindingConstraint::None, 0.0, "inconsistent advisory state"};
}

/// One encounter, advanced step by step. Owns its random source.
class Encounter {
public:
    explicit Encounter(EncounterConfig config) : cfg_(std::move(config))
    {
        cfg_.validate();
        rng_.seed(cfg_.rng_seed);
        ticks_per_beacon_ = cfg_.ticks_per_beacon();
        reach_ = cfg_.link_reach();
        state_ = initial_state(cfg_);
        report_.advisory_trace.push_back({0.0, AdvisoryState::idle()});
        on_tick();
    }

    [[nodiscard]] const EncounterConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const EncounterState& state() const noexcept { return state_; }
    [[nodiscard]] const AdvisoryState& advisory() const { return report_.advisory_trace.back().state; }

    /// Vehicles have passed each other and separated beyond any link range.
    [[nodiscard]] bool finished() const noexcept
    {
        return state_.oncoming_pos < state_.host_pos && state_.host_pos - state_.oncoming_pos > reach_;
    }

    /// Advance one time_step and process the beacon tick if one falls there.
    void step()
    {
        state_ = passfeas::step(state_, cfg_);
        if (state_.step_index % ticks_per_beacon_ == 0) {
            on_tick();
        }
    }

    /// Runs to completion. Throws DurationLimitExceeded if contact never ends.
    [[nodiscard]] EncounterReport run() &&
    {
        while (!finished()) {
            if (state_.t >= cfg_.duration_limit) {
                throw DurationLimitExceeded("vehicles still within channel reach after " +
                                            std::to_string(cfg_.duration_limit) + " s");
            }
            step();
        }
        return std::move(*this).finish();
    }

    [[nodiscard]] EncounterReport finish() &&
    {
        close_blocked_interval();
        report_.simulated_duration = state_.t;
        report_.connectivity_duration = static_cast<double>(report_.connected_ticks) * cfg_.beacon_interval;
        report_.los_blocked_duration = static_cast<double>(blocked_ticks_) * cfg_.beacon_interval;
        report_.verdict = to_verdict(advisory(), cfg_.scenario);
        return std::move(report_);
    }

private:
    struct Link {
        double distance{0.0};
        bool los{true};
        bool delivered{false};
    };

    [[nodiscard]] double position(VehicleId v) const noexcept
    {
        switch (v) {
        case VehicleId::Host: return state_.host_pos;
        case VehicleId::Truck: return state_.truck_pos;
        case VehicleId::Oncoming: return state_.oncoming_pos;
        }
        return 0.0;
    }

    [[nodiscard]] static int heading(VehicleId v) noexcept { return v == VehicleId::Oncoming ? -1 : +1; }

    // Forward when the receiver is ahead of (or level with) the sender.
    [[nodiscard]] Link transmit(VehicleId sender, VehicleId receiver)
    {
        const double ps = position(sender);
        const double pr = position(receiver);
        const Direction dir = (pr - ps) * heading(sender) >= 0.0 ? Direction::Forward : Direction::Backward;
        Link link;
        link.distance = std::abs(pr - ps);
        link.los = cfg_.channel.line_of_sight(ps, pr);
        const double p =
            delivery_probability(cfg_.channel, cfg_.placement, dir, cfg_.table_speed(), link.distance, link.los);
        if (p >= 1.0) {
            link.delivered = true;
        } else if (p > 0.0) {
            link.delivered = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
        }
        return link;
    }

    void record(const BeaconRecord& r)
    {
        report_.beacons.push_back(r);
        ++report_.total_beacons_sent;
        if (r.delivered) {
            ++report_.total_beacons_delivered;
        }
    }

    void apply(const AdvisoryEvent& event)
    {
        const auto& current = advisory();
        auto next = advisory_transition(current, event, cfg_.scenario);
        if (next != current) {
            report_.advisory_trace.push_back({state_.t, next});
        }
    }

    void close_blocked_interval()
    {
        if (blocked_start_) {
            report_.los_blocked.push_back({*blocked_start_, last_blocked_t_});
            blocked_start_.reset();
        }
    }

    void on_tick()
    {
        const double t = state_.t;
        BeaconRecord to_host{t, VehicleId::Oncoming, VehicleId::Host};
        BeaconRecord to_oncoming{t, VehicleId::Host, VehicleId::Oncoming};

        const Link down = transmit(VehicleId::Oncoming, VehicleId::Host);
        const Link up = transmit(VehicleId::Host, VehicleId::Oncoming);
        to_host.distance = down.distance;
        to_host.los = down.los;
        to_host.delivered = down.delivered;
        to_oncoming.distance = up.distance;
        to_oncoming.los = up.los;
        to_oncoming.delivered = up.delivered;
        record(to_oncoming);
        record(to_host);

        bool connected = up.delivered || down.delivered;
        std::optional<BeaconRecord> relayed_to_host;
        if (cfg_.relay_enabled) {
            const Link a1 = transmit(VehicleId::Host, VehicleId::Truck);
            const Link a2 = transmit(VehicleId::Truck, VehicleId::Oncoming);
            const Link b1 = transmit(VehicleId::Oncoming, VehicleId::Truck);
            const Link b2 = transmit(VehicleId::Truck, VehicleId::Host);
            BeaconRecord r_up{t, VehicleId::Host, VehicleId::Oncoming, up.distance, a1.los && a2.los,
                              a1.delivered && a2.delivered, true};
            BeaconRecord r_down{t, VehicleId::Oncoming, VehicleId::Host, down.distance, b1.los && b2.los,
                                b1.delivered && b2.delivered, true};
            record(r_up);
            record(r_down);
            connected = connected || r_up.delivered || r_down.delivered;
            relayed_to_host = r_down;
        }

        if (!down.los) {
            if (!blocked_start_) {
                blocked_start_ = t;
            }
            last_blocked_t_ = t;
            ++blocked_ticks_;
        } else {
            close_blocked_interval();
        }

        if (connected) {
            ++report_.connected_ticks;
            if (!report_.first_contact_distance) {
                report_.first_contact_distance = down.distance;
                report_.first_contact_t = t;
            }
        }

        const BeaconRecord* heard = nullptr;
        if (to_host.delivered) {
            heard = &to_host;
        } else if (relayed_to_host && relayed_to_host->delivered) {
            heard = &*relayed_to_host;
        }
        if (heard) {
            apply(*heard);
            if (advisory().phase == AdvisoryPhase::OncomingDetected) {
                apply(*heard);
            }
        }

        const bool approaching = state_.oncoming_pos > state_.host_pos;
        if (connected || !approaching) {
            silent_ticks_ = 0;
        } else if (advisory().phase == AdvisoryPhase::SafeToPass) {
            if (++silent_ticks_ >= cfg_.link_loss_threshold) {
                apply(LinkTimeout{t});
            }
        }
    }

    EncounterConfig cfg_;
    std::mt19937_64 rng_;
    std::int64_t ticks_per_beacon_{1};
    double reach_{0.0};
    EncounterState state_;
    EncounterReport report_;
    int silent_ticks_{0};
    std::int64_t blocked_ticks_{0};
    std::optional<double> blocked_start_;
    double last_blocked_t_{0.0};
};

[[nodiscard]] inline EncounterReport run_encounter(const EncounterConfig& config)
{
    return Encounter(config).run();
}

/// Same engine; requires a terrain profile so occlusion is modeled.
[[nodiscard]] inline EncounterReport run_altitude_case(const EncounterConfig& config)
{
    if (!config.channel.terrain()) {
        throw ValidationError("altitude case requires a terrain profile in the channel model");
    }
    return run_encounter(config);
}

} // namespace passfeas
