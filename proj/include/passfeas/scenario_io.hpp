#pragma once

/**
 * @file scenario_io.hpp
 * @brief JSON scenario, calibration and terrain files; CSV encoding.
 *
 * Scenario file layout:
 *
 *     {
 *       "pass_scenario": {
 *         "v1": {"value": 55, "unit": "mph"},   // speeds always carry a unit
 *         "v2": {"value": 55, "unit": "mph"},
 *         "headway": 24.6, "reaction_time": 1, "car_length": 5,
 *         "truck_length": 20, "safety_margin": 40, "max_accel": 0.67
 *       },
 *       "channel": {
 *         "placement": "rooftop",
 *         "calibration": ["inside_channel.json", "rooftop_channel.json"],
 *         "delivery": {"model": "deterministic"}
 *       },
 *       "terrain": "crest_terrain.json",                // optional
 *       "sim": {"initial_separation": 1500, "beacon_interval": 0.1, ...}
 *     }
 *
 * Referenced files are looked up next to the scenario first, then in the
 * preset directory ($PASSFEAS_DATA_DIR, else the installed data directory).
 */

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "passfeas/channel_model.hpp"
#include "passfeas/errors.hpp"
#include "passfeas/pass_model.hpp"
#include "passfeas/sim_engine.hpp"
#include "passfeas/units.hpp"

#ifndef PASSFEAS_DEFAULT_DATA_DIR
#define PASSFEAS_DEFAULT_DATA_DIR "data"
#endif

namespace passfeas::io {

namespace fs = std::filesystem;
using nlohmann::json;

[[nodiscard]] inline fs::path data_dir()
{
    if (const char* env = std::getenv("PASSFEAS_DATA_DIR"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path(PASSFEAS_DEFAULT_DATA_DIR);
}

/// Finds `name` as given, next to `base_dir`, or in the preset directory.
[[nodiscard]] inline fs::path resolve_path(const fs::path& name, const fs::path& base_dir = {})
{
    std::error_code ec;
    if (name.is_absolute()) {
        if (fs::exists(name, ec)) {
            return name;
        }
    } else {
        std::vector<fs::path> candidates{name};
        if (!base_dir.empty()) {
            candidates.push_back(base_dir / name);
        }
        candidates.push_back(data_dir() / name);
        for (const auto& candidate : candidates) {
            if (fs::is_regular_file(candidate, ec)) {
                return candidate;
            }
        }
    }
    throw IoError("cannot find file '" + name.string() + "'");
}

[[nodiscard]] inline json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

/// Writes the whole buffer or nothing observable on failure.
inline void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

namespace detail {

[[nodiscard]] inline const json& require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw ValidationError(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

[[nodiscard]] inline double number(const json& v, const std::string& where)
{
    if (!v.is_number()) {
        throw ValidationError(where + " must be a number");
    }
    return v.get<double>();
}

[[nodiscard]] inline std::string text(const json& v, const std::string& where)
{
    if (!v.is_string()) {
        throw ValidationError(where + " must be a string");
    }
    return v.get<std::string>();
}

} // namespace detail

/// `{"value": x, "unit": "mph"|"mps"}` to meters/second. Bare numbers are rejected.
[[nodiscard]] inline double parse_speed(const json& v, const std::string& where)
{
    if (!v.is_object()) {
        throw ValidationError(where + " must be an object {\"value\", \"unit\"}; speeds need an explicit unit");
    }
    const double value = detail::number(detail::require(v, "value", where), where + ".value");
    const std::string unit = detail::text(detail::require(v, "unit", where), where + ".unit");
    try {
        return units::speed_to_mps(value, unit);
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

[[nodiscard]] inline PassScenario parse_pass_scenario(const json& j)
{
    const std::string w = "pass_scenario";
    if (!j.is_object()) {
        throw ValidationError(w + " must be an object");
    }
    auto num = [&](const char* key) { return detail::number(detail::require(j, key, w), w + "." + key); };
    PassScenario s;
    s.v1 = parse_speed(detail::require(j, "v1", w), w + ".v1");
    s.v2 = parse_speed(detail::require(j, "v2", w), w + ".v2");
    s.headway = num("headway");
    s.reaction_time = num("reaction_time");
    s.car_length = num("car_length");
    s.truck_length = num("truck_length");
    s.safety_margin = num("safety_margin");
    s.max_accel = num("max_accel");
    s.validate();
    return s;
}

/// Entries from `{"entries": [...]}` or a bare array; not yet validated as a table.
[[nodiscard]] inline std::vector<RangeEntry> parse_range_entries(const json& j, const std::string& where)
{
    const json& list = j.is_object() ? detail::require(j, "entries", where) : j;
    if (!list.is_array()) {
        throw ValidationError(where + ": calibration entries must be an array");
    }
    std::vector<RangeEntry> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& e = list[i];
        const std::string w = where + " entry " + std::to_string(i);
        RangeEntry r;
        r.placement = parse_placement(detail::text(detail::require(e, "placement", w), w + ".placement"));
        r.direction = parse_direction(detail::text(detail::require(e, "direction", w), w + ".direction"));
        r.speed = detail::number(detail::require(e, "speed_mps", w), w + ".speed_mps");
        r.max_range = detail::number(detail::require(e, "max_range_m", w), w + ".max_range_m");
        out.push_back(r);
    }
    return out;
}

[[nodiscard]] inline RangeTable load_range_table(const fs::path& path)
{
    return RangeTable(parse_range_entries(read_json(path), path.string()));
}

[[nodiscard]] inline json range_table_to_json(const RangeTable& table)
{
    json entries = json::array();
    for (const auto& e : table.entries()) {
        entries.push_back({{"placement", to_string(e.placement)},
                           {"direction", to_string(e.direction)},
                           {"speed_mps", e.speed},
                           {"max_range_m", e.max_range}});
    }
    return {{"entries", entries}};
}

/// `{"antenna_height_m": h, "samples": [[pos, elev], ...]}`; a missing height
/// falls back to `default_height`.
[[nodiscard]] inline TerrainProfile parse_terrain(const json& j, double default_height, const std::string& where)
{
    const json& list = detail::require(j, "samples", where);
    if (!list.is_array()) {
        throw ValidationError(where + ".samples must be an array of [position_m, elevation_m]");
    }
    std::vector<TerrainProfile::Sample> samples;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& p = list[i];
        if (!p.is_array() || p.size() != 2) {
            throw ValidationError(where + ".samples[" + std::to_string(i) + "] must be [position_m, elevation_m]");
        }
        samples.push_back({detail::number(p[0], where + ".samples position"),
                           detail::number(p[1], where + ".samples elevation")});
    }
    double height = default_height;
    if (j.contains("antenna_height_m")) {
        height = detail::number(j.at("antenna_height_m"), where + ".antenna_height_m");
    }
    return TerrainProfile(std::move(samples), height);
}

[[nodiscard]] inline DeliveryModel parse_delivery(const json& j)
{
    const std::string model = detail::text(detail::require(j, "model", "channel.delivery"), "channel.delivery.model");
    if (model == "deterministic") {
        return Deterministic{};
    }
    if (model == "linear_edge") {
        return LinearEdge{detail::number(detail::require(j, "edge_width_m", "channel.delivery"),
                                         "channel.delivery.edge_width_m")};
    }
    throw ValidationError("channel.delivery.model must be \"deterministic\" or \"linear_edge\"");
}

struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<Placement> placement;
    std::optional<fs::path> terrain;
};

/// A parsed scenario file plus the raw document it came from.
struct Scenario {
    json document;
    fs::path base_dir;
    EncounterConfig config;
};

/**
 * Builds the full configuration from a scenario document. The pass scenario,
 * calibration and terrain are always validated; encounter-level invariants
 * (which need the calibrated range at the scenario speed) only when
 * `validate_encounter` is set.
 */
[[nodiscard]] inline EncounterConfig build_config(const json& doc, const fs::path& base_dir,
                                                  const ScenarioOverrides& ov = {}, bool validate_encounter = true)
{
    if (!doc.is_object()) {
        throw ValidationError("scenario file must be a JSON object");
    }
    EncounterConfig cfg;
    cfg.scenario = parse_pass_scenario(detail::require(doc, "pass_scenario", "scenario"));

    const json& ch = detail::require(doc, "channel", "scenario");
    cfg.placement = parse_placement(detail::text(detail::require(ch, "placement", "channel"), "channel.placement"));
    if (ov.placement) {
        cfg.placement = *ov.placement;
    }

    std::vector<RangeEntry> entries;
    const json& cal = detail::require(ch, "calibration", "channel");
    auto append_file = [&](const json& name) {
        const fs::path p = resolve_path(detail::text(name, "channel.calibration path"), base_dir);
        auto more = parse_range_entries(read_json(p), p.string());
        entries.insert(entries.end(), more.begin(), more.end());
    };
    if (cal.is_string()) {
        if (cal.get<std::string>() == "default") {
            entries = paper_calibration().entries();
        } else {
            append_file(cal);
        }
    } else if (cal.is_array() && (cal.empty() || cal.front().is_string())) {
        for (const auto& name : cal) {
            append_file(name);
        }
    } else {
        entries = parse_range_entries(cal, "channel.calibration");
    }
    RangeTable table(std::move(entries));

    DeliveryModel delivery = Deterministic{};
    if (ch.contains("delivery")) {
        delivery = parse_delivery(ch.at("delivery"));
    }

    std::optional<TerrainProfile> terrain;
    std::optional<fs::path> terrain_path = ov.terrain;
    if (!terrain_path && doc.contains("terrain") && !doc.at("terrain").is_null()) {
        terrain_path = fs::path(detail::text(doc.at("terrain"), "terrain"));
    }
    if (terrain_path) {
        const fs::path p = resolve_path(*terrain_path, base_dir);
        terrain = parse_terrain(read_json(p), default_antenna_height(cfg.placement), p.string());
    }
    cfg.channel = ChannelModel(std::move(table), std::move(terrain), delivery);

    if (doc.contains("sim")) {
        const json& sim = doc.at("sim");
        auto opt_num = [&](const char* key, double& field) {
            if (sim.contains(key)) {
                field = detail::number(sim.at(key), std::string("sim.") + key);
            }
        };
        opt_num("initial_separation", cfg.initial_separation);
        opt_num("beacon_interval", cfg.beacon_interval);
        opt_num("time_step", cfg.time_step);
        opt_num("duration_limit", cfg.duration_limit);
        if (sim.contains("rng_seed")) {
            if (!sim.at("rng_seed").is_number_unsigned()) {
                throw ValidationError("sim.rng_seed must be a non-negative integer");
            }
            cfg.rng_seed = sim.at("rng_seed").get<std::uint64_t>();
        }
        if (sim.contains("relay_enabled")) {
            if (!sim.at("relay_enabled").is_boolean()) {
                throw ValidationError("sim.relay_enabled must be a boolean");
            }
            cfg.relay_enabled = sim.at("relay_enabled").get<bool>();
        }
        if (sim.contains("link_loss_threshold")) {
            if (!sim.at("link_loss_threshold").is_number_integer()) {
                throw ValidationError("sim.link_loss_threshold must be an integer");
            }
            cfg.link_loss_threshold = sim.at("link_loss_threshold").get<int>();
        }
    }
    if (ov.seed) {
        cfg.rng_seed = *ov.seed;
    }
    if (validate_encounter) {
        try {
            cfg.validate();
        } catch (const ExtrapolationError& e) {
            throw ValidationError(std::string("scenario speed outside the channel calibration: ") + e.what());
        }
    }
    return cfg;
}

[[nodiscard]] inline Scenario load_scenario(const fs::path& name, const ScenarioOverrides& ov = {},
                                            bool validate_encounter = true)
{
    const fs::path path = resolve_path(name);
    Scenario s;
    s.document = read_json(path);
    s.base_dir = path.parent_path();
    s.config = build_config(s.document, s.base_dir, ov, validate_encounter);
    return s;
}

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] inline std::string full_precision(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline std::string fixed(double v, int decimals = 2)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

inline constexpr const char* kBeaconCsvHeader = "t_s,sender,receiver,distance_m,los,delivered,via_relay";
inline constexpr const char* kSweepCsvHeader = "param,min_time_s,min_range_m,verdict,connectivity_s";

[[nodiscard]] inline std::string beacons_to_csv(const std::vector<BeaconRecord>& beacons)
{
    std::string out = kBeaconCsvHeader;
    out += '\n';
    for (const auto& b : beacons) {
        out += full_precision(b.t);
        out += ',';
        out += to_string(b.sender);
        out += ',';
        out += to_string(b.receiver);
        out += ',';
        out += full_precision(b.distance);
        out += b.los ? ",1" : ",0";
        out += b.delivered ? ",1" : ",0";
        out += b.via_relay ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

} // namespace passfeas::io
