#pragma once

/**
 * @file channel_model.hpp
 * @brief Empirical V2V range model with terrain occlusion and delivery models.
 *
 * Maximum communication range is looked up in a calibration table keyed by
 * OBU placement, signal direction and per-vehicle approach speed, with linear
 * interpolation between calibrated speeds and no extrapolation. A terrain
 * profile adds a geometric line-of-sight test between antennas.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "passfeas/errors.hpp"
#include "passfeas/units.hpp"

namespace passfeas {

enum class Placement { InsideVehicle, Rooftop };

/// Relative to the transmitting vehicle's heading.
enum class Direction { Forward, Backward };

[[nodiscard]] constexpr const char* to_string(Placement p) noexcept
{
    return p == Placement::InsideVehicle ? "inside_vehicle" : "rooftop";
}

[[nodiscard]] constexpr const char* to_string(Direction d) noexcept
{
    return d == Direction::Forward ? "forward" : "backward";
}

[[nodiscard]] inline Placement parse_placement(std::string_view s)
{
    if (s == "inside_vehicle" || s == "inside") {
        return Placement::InsideVehicle;
    }
    if (s == "rooftop") {
        return Placement::Rooftop;
    }
    throw ValidationError("unknown placement '" + std::string(s) + "' (expected \"inside_vehicle\" or \"rooftop\")");
}

[[nodiscard]] inline Direction parse_direction(std::string_view s)
{
    if (s == "forward") {
        return Direction::Forward;
    }
    if (s == "backward") {
        return Direction::Backward;
    }
    throw ValidationError("unknown direction '" + std::string(s) + "' (expected \"forward\" or \"backward\")");
}

/// Default antenna height above the road surface for terrain LOS, meters.
[[nodiscard]] constexpr double default_antenna_height(Placement p) noexcept
{
    return p == Placement::Rooftop ? 1.5 : 1.1;
}

struct RangeEntry {
    Placement placement{Placement::Rooftop};
    Direction direction{Direction::Forward};
    double speed{0.0};      // m/s, per vehicle in a symmetric approach
    double max_range{0.0};  // m

    friend bool operator==(const RangeEntry&, const RangeEntry&) = default;
};

class RangeTable {
public:
    RangeTable() = default;

    /// Throws ValidationError on duplicate keys, non-positive ranges or speeds.
    explicit RangeTable(std::vector<RangeEntry> entries) : entries_(std::move(entries))
    {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            if (!std::isfinite(e.speed) || e.speed <= 0.0) {
                throw ValidationError("RangeTable entry " + std::to_string(i) + ": speed_mps must be > 0");
            }
            if (!std::isfinite(e.max_range) || e.max_range <= 0.0) {
                throw ValidationError("RangeTable entry " + std::to_string(i) + ": max_range_m must be > 0");
            }
            for (std::size_t j = 0; j < i; ++j) {
                const auto& o = entries_[j];
                if (o.placement == e.placement && o.direction == e.direction && o.speed == e.speed) {
                    throw ValidationError("RangeTable entry " + std::to_string(i) + ": duplicate key (" +
                                          to_string(e.placement) + ", " + to_string(e.direction) + ", " +
                                          std::to_string(e.speed) + " m/s)");
                }
            }
        }
        std::stable_sort(entries_.begin(), entries_.end(), [](const RangeEntry& a, const RangeEntry& b) {
            if (a.placement != b.placement) {
                return a.placement < b.placement;
            }
            if (a.direction != b.direction) {
                return a.direction < b.direction;
            }
            return a.speed < b.speed;
        });
    }

    [[nodiscard]] const std::vector<RangeEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    [[nodiscard]] bool has(Placement p) const noexcept
    {
        return std::any_of(entries_.begin(), entries_.end(), [p](const auto& e) { return e.placement == p; });
    }

    [[nodiscard]] bool has(Placement p, Direction d) const noexcept
    {
        return std::any_of(entries_.begin(), entries_.end(),
                           [p, d](const auto& e) { return e.placement == p && e.direction == d; });
    }

    /// Smallest calibrated range over all entries.
    [[nodiscard]] double smallest_range() const noexcept
    {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& e : entries_) {
            r = std::min(r, e.max_range);
        }
        return r;
    }

    /// Largest calibrated range for a placement (0 when the placement is absent).
    [[nodiscard]] double largest_range(Placement p) const noexcept
    {
        double r = 0.0;
        for (const auto& e : entries_) {
            if (e.placement == p) {
                r = std::max(r, e.max_range);
            }
        }
        return r;
    }

    /// Calibrated range, linearly interpolated in speed; never extrapolates.
    [[nodiscard]] double max_range(Placement p, Direction d, double speed) const
    {
        std::vector<const RangeEntry*> row;
        for (const auto& e : entries_) {
            if (e.placement == p && e.direction == d) {
                row.push_back(&e);
            }
        }
        if (row.empty()) {
            throw ExtrapolationError(std::string("no calibration for (") + to_string(p) + ", " + to_string(d) + ")");
        }
        const double lo = row.front()->speed;
        const double hi = row.back()->speed;
        if (!(speed >= lo - kSpeedTolerance && speed <= hi + kSpeedTolerance)) {
            throw ExtrapolationError("speed " + std::to_string(speed) + " m/s outside calibrated interval [" +
                                     std::to_string(lo) + ", " + std::to_string(hi) + "] for (" + to_string(p) +
                                     ", " + to_string(d) + ")");
        }
        if (speed <= lo) {
            return row.front()->max_range;
        }
        if (speed >= hi) {
            return row.back()->max_range;
        }
        for (std::size_t i = 1; i < row.size(); ++i) {
            const auto& a = *row[i - 1];
            const auto& b = *row[i];
            if (speed == b.speed) {
                return b.max_range;
            }
            if (speed < b.speed) {
                const double frac = (speed - a.speed) / (b.speed - a.speed);
                return a.max_range + frac * (b.max_range - a.max_range);
            }
        }
        return row.back()->max_range;
    }

    /// Copy with every range multiplied by factor (> 0).
    [[nodiscard]] RangeTable scaled(double factor) const
    {
        auto copy = entries_;
        for (auto& e : copy) {
            e.max_range *= factor;
        }
        return RangeTable(std::move(copy));
    }

    /// Absorbs floating noise from unit conversion at the interval ends.
    static constexpr double kSpeedTolerance = 1e-9;

private:
    std::vector<RangeEntry> entries_;
};

/// Calibration measured with two OBUs approaching at 55 and 70 mph. The
/// rooftop figure was reported only as "about 1 km"; 1000 m is a declared
/// constant.
[[nodiscard]] inline RangeTable paper_calibration()
{
    using units::mph_to_mps;
    using enum Placement;
    using enum Direction;
    return RangeTable({
        {InsideVehicle, Forward, mph_to_mps(55), 466.0},
        {InsideVehicle, Forward, mph_to_mps(70), 401.0},
        // Backward range grows with speed in the measurements; kept as measured.
        {InsideVehicle, Backward, mph_to_mps(55), 327.0},
        {InsideVehicle, Backward, mph_to_mps(70), 400.0},
        {Rooftop, Forward, mph_to_mps(55), 1000.0},
        {Rooftop, Forward, mph_to_mps(70), 1000.0},
        {Rooftop, Backward, mph_to_mps(55), 1000.0},
        {Rooftop, Backward, mph_to_mps(70), 1000.0},
    });
}

/// Rooftop variant with a slightly longer reverse range (1020 m backward).
[[nodiscard]] inline RangeTable asymmetric_rooftop_calibration()
{
    using units::mph_to_mps;
    using enum Placement;
    using enum Direction;
    return RangeTable({
        {Rooftop, Forward, mph_to_mps(55), 1000.0},
        {Rooftop, Forward, mph_to_mps(70), 1000.0},
        {Rooftop, Backward, mph_to_mps(55), 1020.0},
        {Rooftop, Backward, mph_to_mps(70), 1020.0},
    });
}

class TerrainProfile {
public:
    struct Sample {
        double position{0.0};   // m along the road
        double elevation{0.0};  // m

        friend bool operator==(const Sample&, const Sample&) = default;
    };

    TerrainProfile() = default;

    /// Throws ValidationError unless positions strictly increase and there are >= 2 samples.
    TerrainProfile(std::vector<Sample> samples, double antenna_height)
        : samples_(std::move(samples)), antenna_height_(antenna_height)
    {
        if (samples_.size() < 2) {
            throw ValidationError("TerrainProfile needs at least 2 samples");
        }
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!std::isfinite(samples_[i].position) || !std::isfinite(samples_[i].elevation)) {
                throw ValidationError("TerrainProfile sample " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(samples_[i].position > samples_[i - 1].position)) {
                throw ValidationError("TerrainProfile positions must be strictly increasing (sample " +
                                      std::to_string(i) + ")");
            }
        }
        if (!std::isfinite(antenna_height_) || antenna_height_ < 0.0) {
            throw ValidationError("TerrainProfile antenna_height must be >= 0");
        }
    }

    [[nodiscard]] const std::vector<Sample>& samples() const noexcept { return samples_; }
    [[nodiscard]] double antenna_height() const noexcept { return antenna_height_; }
    [[nodiscard]] double front() const noexcept { return samples_.front().position; }
    [[nodiscard]] double back() const noexcept { return samples_.back().position; }

    [[nodiscard]] bool contains(double pos) const noexcept { return pos >= front() && pos <= back(); }

    /// Piecewise-linear terrain height. Throws OutOfProfile outside the span.
    [[nodiscard]] double elevation(double pos) const
    {
        if (!contains(pos)) {
            throw OutOfProfile("position " + std::to_string(pos) + " m outside terrain span [" +
                               std::to_string(front()) + ", " + std::to_string(back()) + "]");
        }
        auto it = std::lower_bound(samples_.begin(), samples_.end(), pos,
                                   [](const Sample& s, double p) { return s.position < p; });
        if (it->position == pos) {
            return it->elevation;
        }
        const auto& b = *it;
        const auto& a = *(it - 1);
        return a.elevation + (pos - a.position) / (b.position - a.position) * (b.elevation - a.elevation);
    }

    /// Same profile with a different antenna height.
    [[nodiscard]] TerrainProfile with_antenna_height(double h) const { return TerrainProfile(samples_, h); }

    /// A flat profile over [from, to].
    [[nodiscard]] static TerrainProfile flat(double from, double to, double antenna_height, double elevation = 0.0)
    {
        return TerrainProfile({{from, elevation}, {to, elevation}}, antenna_height);
    }

private:
    std::vector<Sample> samples_;
    double antenna_height_{0.0};
};

/// True iff the straight path between the two antennas stays on or above the
/// terrain at every sample strictly between them. The terrain is piecewise
/// linear, so checking its breakpoints is exact.
[[nodiscard]] inline bool line_of_sight(const TerrainProfile& terrain, double pos_a, double pos_b)
{
    const double za = terrain.elevation(pos_a) + terrain.antenna_height();
    const double zb = terrain.elevation(pos_b) + terrain.antenna_height();
    if (pos_a == pos_b) {
        return true;
    }
    // Evaluate from the lower position so the result is symmetric bit for bit.
    const double x0 = std::min(pos_a, pos_b);
    const double x1 = std::max(pos_a, pos_b);
    const double z0 = pos_a < pos_b ? za : zb;
    const double z1 = pos_a < pos_b ? zb : za;
    for (const auto& s : terrain.samples()) {
        if (s.position <= x0) {
            continue;
        }
        if (s.position >= x1) {
            break;
        }
        const double ray = z0 + (s.position - x0) / (x1 - x0) * (z1 - z0);
        if (ray < s.elevation) {
            return false;
        }
    }
    return true;
}

/// Disk model: delivered exactly when within range.
struct Deterministic {
    friend bool operator==(const Deterministic&, const Deterministic&) = default;
};

/// Certain delivery up to (range - edge_width), then a linear ramp to 0 at range.
struct LinearEdge {
    double edge_width{0.0};  // m

    friend bool operator==(const LinearEdge&, const LinearEdge&) = default;
};

using DeliveryModel = std::variant<Deterministic, LinearEdge>;

class ChannelModel {
public:
    ChannelModel() = default;

    ChannelModel(RangeTable table, std::optional<TerrainProfile> terrain = std::nullopt,
                 DeliveryModel delivery = Deterministic{})
        : table_(std::move(table)), terrain_(std::move(terrain)), delivery_(delivery)
    {
        if (const auto* edge = std::get_if<LinearEdge>(&delivery_)) {
            if (!std::isfinite(edge->edge_width) || edge->edge_width < 0.0) {
                throw ValidationError("LinearEdge edge_width must be >= 0");
            }
            if (!table_.empty() && edge->edge_width > table_.smallest_range()) {
                throw ValidationError("LinearEdge edge_width exceeds the smallest table range");
            }
        }
    }

    [[nodiscard]] const RangeTable& table() const noexcept { return table_; }
    [[nodiscard]] const std::optional<TerrainProfile>& terrain() const noexcept { return terrain_; }
    [[nodiscard]] const DeliveryModel& delivery() const noexcept { return delivery_; }

    [[nodiscard]] bool is_deterministic() const noexcept
    {
        return std::holds_alternative<Deterministic>(delivery_);
    }

    [[nodiscard]] double max_range(Placement p, Direction d, double speed) const
    {
        return table_.max_range(p, d, speed);
    }

    /// Line-of-sight between two road positions; always true without terrain.
    [[nodiscard]] bool line_of_sight(double pos_a, double pos_b) const
    {
        return !terrain_ || passfeas::line_of_sight(*terrain_, pos_a, pos_b);
    }

private:
    RangeTable table_;
    std::optional<TerrainProfile> terrain_;
    DeliveryModel delivery_{Deterministic{}};
};

[[nodiscard]] inline double max_range(const ChannelModel& m, Placement p, Direction d, double speed)
{
    return m.max_range(p, d, speed);
}

/// Probability that one beacon crosses `distance` meters.
[[nodiscard]] inline double delivery_probability(const ChannelModel& m, Placement p, Direction d, double speed,
                                                 double distance, bool los)
{
    if (!(distance >= 0.0)) {
        throw ValidationError("delivery distance must be >= 0");
    }
    const double range = m.max_range(p, d, speed);
    if (!los) {
        return 0.0;
    }
    if (const auto* edge = std::get_if<LinearEdge>(&m.delivery())) {
        const double solid = range - edge->edge_width;
        if (distance <= solid) {
            return 1.0;
        }
        if (distance >= range) {
            return 0.0;
        }
        return (range - distance) / edge->edge_width;
    }
    return distance <= range ? 1.0 : 0.0;
}

struct HopOptions {
    // Absolute road position of the source; used only for terrain queries.
    double origin{0.0};
    // +1 when the chain extends toward increasing road positions, -1 otherwise.
    int heading{+1};
    // Direction of each hop relative to its transmitter's heading, one entry per
    // hop (relays + 1). Empty means every hop transmits Forward.
    std::vector<Direction> hop_directions{};
};

/// Resolution of the final-hop reach scan when terrain is present, meters.
inline constexpr double kReachScanStep = 0.1;

/**
 * Farthest end-to-end separation reachable from a source through a chain of
 * relays. hop_positions are the relays' distances from the source along the
 * chain, ascending. Each hop must fit within its single-hop range and have
 * line of sight; the chain stops at the first relay that cannot be reached and
 * the final hop extends as far as the last reached node's range allows.
 */
[[nodiscard]] inline double effective_multihop_range(const ChannelModel& m, std::span<const double> hop_positions,
                                                     Placement placement, double speed, const HopOptions& opt = {})
{
    if (!std::is_sorted(hop_positions.begin(), hop_positions.end())) {
        throw ValidationError("hop_positions must be ordered along the road");
    }
    if (!opt.hop_directions.empty() && opt.hop_directions.size() != hop_positions.size() + 1) {
        throw ValidationError("hop_directions must have one entry per hop (relays + 1)");
    }
    if (opt.heading != 1 && opt.heading != -1) {
        throw ValidationError("HopOptions.heading must be +1 or -1");
    }
    auto hop_range = [&](std::size_t hop) {
        const Direction d = opt.hop_directions.empty() ? Direction::Forward : opt.hop_directions[hop];
        return m.max_range(placement, d, speed);
    };
    auto absolute = [&](double offset) { return opt.origin + opt.heading * offset; };

    double reached = 0.0;
    std::size_t hop = 0;
    for (; hop < hop_positions.size(); ++hop) {
        const double next = hop_positions[hop];
        if (next - reached > hop_range(hop) || !m.line_of_sight(absolute(reached), absolute(next))) {
            break;
        }
        reached = next;
    }
    const double range = hop_range(hop);
    if (!m.terrain()) {
        return reached + range;
    }
    // Farthest point within range, inside the profile, that the last node can see.
    const auto& terrain = *m.terrain();
    double best = reached;
    const auto steps = static_cast<long long>(std::floor(range / kReachScanStep));
    for (long long k = 1; k <= steps + 1; ++k) {
        const double offset =
            k <= steps ? std::min(reached + static_cast<double>(k) * kReachScanStep, reached + range) : reached + range;
        const double pos = absolute(offset);
        if (!terrain.contains(pos)) {
            break;
        }
        if (m.line_of_sight(absolute(reached), pos)) {
            best = offset;
        }
    }
    return best;
}

} // namespace passfeas
