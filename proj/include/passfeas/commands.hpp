#pragma once

/**
 * @file commands.hpp
 * @brief The `bounds`, `run`, `sweep` and `repro` commands behind the CLI.
 *
 * Each command writes to the given streams and returns a process exit code:
 *
 *   0  success
 *   1  usage error (bad command line)
 *   2  validation error (invariant violated, malformed or uncalibrated input)
 *   3  domain error (maneuver closed form has no real solution)
 *   4  I/O error
 *   5  encounter never lost contact within duration_limit
 *   6  reproduction self-check mismatch
 */

#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "passfeas/channel_model.hpp"
#include "passfeas/errors.hpp"
#include "passfeas/pass_model.hpp"
#include "passfeas/scenario_io.hpp"
#include "passfeas/sim_engine.hpp"
#include "passfeas/units.hpp"

namespace passfeas::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kDomain = 3,
    kIo = 4,
    kDurationLimit = 5,
    kReproMismatch = 6,
};

/// Runs `body`, mapping library exceptions to exit codes and messages on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const DurationLimitExceeded& e) {
        err << "duration limit exceeded: " << e.what() << '\n';
        return kDurationLimit;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const ExtrapolationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const OutOfProfile& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    }
}

struct CommonOptions {
    fs::path scenario;
    bool json_output{false};
    io::ScenarioOverrides overrides;
};

// ---------------------------------------------------------------- bounds

inline int cmd_bounds(const CommonOptions& opt, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const auto sc = io::load_scenario(opt.scenario, opt.overrides, /*validate_encounter=*/false);
        const auto& cfg = sc.config;
        const ManeuverBounds bounds = maneuver_bounds(cfg.scenario);
        const double speed = cfg.table_speed();

        json placements = json::array();
        std::vector<std::string> lines;
        for (const Placement p : {Placement::InsideVehicle, Placement::Rooftop}) {
            if (!cfg.channel.table().has(p, Direction::Forward)) {
                continue;
            }
            json row{{"placement", to_string(p)}};
            std::string line = std::string("feasibility ") + to_string(p) + ": ";
            try {
                const double available = cfg.channel.max_range(p, Direction::Forward, speed);
                const AdvisoryVerdict v = feasibility(cfg.scenario, available);
                row["available_range_m"] = available;
                row["verdict"] = to_string(v.verdict);
                row["deficit_m"] = v.deficit;
                line += std::string(to_string(v.verdict)) + " (available " + io::fixed(available) + " m";
                if (v.verdict == Verdict::Infeasible) {
                    line += ", deficit " + io::fixed(v.deficit) + " m";
                }
                line += ")";
            } catch (const ExtrapolationError& e) {
                row["verdict"] = to_string(Verdict::Unknown);
                row["cause"] = e.what();
                line += "Unknown (speed outside calibration)";
            }
            placements.push_back(row);
            lines.push_back(line);
        }

        if (opt.json_output) {
            json doc{{"min_pass_time_s", bounds.min_time},
                     {"min_comm_range_m", bounds.min_range},
                     {"feasibility", placements}};
            out << doc.dump(2) << '\n';
        } else {
            out << "min_pass_time_s: " << io::fixed(bounds.min_time) << '\n';
            out << "min_comm_range_m: " << io::fixed(bounds.min_range) << '\n';
            for (const auto& l : lines) {
                out << l << '\n';
            }
        }
        return kOk;
    });
}

// ---------------------------------------------------------------- run

[[nodiscard]] inline json report_to_json(const EncounterReport& r)
{
    json trace = json::array();
    for (const auto& s : r.advisory_trace) {
        trace.push_back({{"t_s", s.t}, {"state", to_string(s.state)}});
    }
    json blocked = json::array();
    for (const auto& b : r.los_blocked) {
        blocked.push_back({{"start_s", b.start}, {"end_s", b.end}});
    }
    return {{"advisory", to_string(r.final_advisory())},
            {"verdict", to_string(r.verdict.verdict)},
            {"binding_constraint", to_string(r.verdict.binding)},
            {"deficit", r.verdict.deficit},
            {"first_contact_distance_m", r.first_contact_distance ? json(*r.first_contact_distance) : json(nullptr)},
            {"first_contact_t_s", r.first_contact_t ? json(*r.first_contact_t) : json(nullptr)},
            {"connectivity_duration_s", r.connectivity_duration},
            {"total_beacons_sent", r.total_beacons_sent},
            {"total_beacons_delivered", r.total_beacons_delivered},
            {"los_blocked_duration_s", r.los_blocked_duration},
            {"los_blocked", blocked},
            {"simulated_duration_s", r.simulated_duration},
            {"advisory_trace", trace}};
}

inline int cmd_run(const CommonOptions& opt, const std::optional<fs::path>& csv, std::ostream& out,
                   std::ostream& err)
{
    return guarded(err, [&] {
        const auto sc = io::load_scenario(opt.scenario, opt.overrides);
        const EncounterReport report = run_encounter(sc.config);
        if (csv) {
            io::write_file(*csv, io::beacons_to_csv(report.beacons));
        }
        if (opt.json_output) {
            out << report_to_json(report).dump(2) << '\n';
            return kOk;
        }
        out << "advisory: " << to_string(report.final_advisory()) << '\n';
        out << "verdict: " << to_string(report.verdict.verdict);
        if (report.verdict.binding != BindingConstraint::None) {
            out << " (" << to_string(report.verdict.binding) << ")";
        }
        out << '\n';
        out << "first_contact_distance_m: "
            << (report.first_contact_distance ? io::fixed(*report.first_contact_distance) : std::string("none"))
            << '\n';
        out << "connectivity_duration_s: " << io::fixed(report.connectivity_duration) << '\n';
        out << "beacons_sent: " << report.total_beacons_sent << '\n';
        out << "beacons_delivered: " << report.total_beacons_delivered << '\n';
        if (sc.config.channel.terrain()) {
            out << "los_blocked_s: " << io::fixed(report.los_blocked_duration) << '\n';
        }
        return kOk;
    });
}

// ---------------------------------------------------------------- sweep

struct SweepSpec {
    std::string param;                 // dotted path, e.g. "pass_scenario.v1"
    std::vector<double> values;
    std::optional<std::string> unit;   // speed unit for speed parameters
    std::optional<fs::path> output;

    void validate() const
    {
        if (param.empty()) {
            throw ValidationError("sweep parameter path is empty");
        }
        if (values.empty()) {
            throw ValidationError("sweep needs at least one value");
        }
    }
};

/// Inclusive arithmetic range; the stop value is kept when within 1e-9 step.
[[nodiscard]] inline std::vector<double> range_values(double start, double stop, double step)
{
    if (!(step > 0.0) || !(stop >= start)) {
        throw ValidationError("sweep range needs step > 0 and stop >= start");
    }
    std::vector<double> v;
    for (long long k = 0;; ++k) {
        const double x = start + static_cast<double>(k) * step;
        if (x > stop + 1e-9 * step) {
            break;
        }
        v.push_back(x);
    }
    return v;
}

/// `{"param": ..., "values": [...] | "range": {"start","stop","step"}, "unit": ..., "output": ...}`
[[nodiscard]] inline SweepSpec parse_sweep_spec(const json& j)
{
    SweepSpec s;
    if (!j.is_object() || !j.contains("param") || !j.at("param").is_string()) {
        throw ValidationError("sweep spec needs a string field 'param'");
    }
    s.param = j.at("param").get<std::string>();
    if (j.contains("values")) {
        for (const auto& v : j.at("values")) {
            if (!v.is_number()) {
                throw ValidationError("sweep values must be numbers");
            }
            s.values.push_back(v.get<double>());
        }
    } else if (j.contains("range")) {
        const auto& r = j.at("range");
        s.values = range_values(r.at("start").get<double>(), r.at("stop").get<double>(), r.at("step").get<double>());
    }
    if (j.contains("unit")) {
        s.unit = j.at("unit").get<std::string>();
    }
    if (j.contains("output")) {
        s.output = fs::path(j.at("output").get<std::string>());
    }
    s.validate();
    return s;
}

[[nodiscard]] inline json::json_pointer to_pointer(const std::string& dotted)
{
    std::string ptr;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const auto dot = dotted.find('.', start);
        const auto part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ValidationError("malformed sweep parameter path '" + dotted + "'");
        }
        ptr += "/" + part;
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    return json::json_pointer(ptr);
}

/// Returns a copy of `doc` with the swept parameter set and the value in SI.
[[nodiscard]] inline std::pair<json, double> apply_sweep_value(const json& doc, const SweepSpec& spec, double value)
{
    const auto ptr = to_pointer(spec.param);
    if (!doc.contains(ptr)) {
        throw ValidationError("swept parameter '" + spec.param + "' does not exist in the scenario");
    }
    json copy = doc;
    json& target = copy.at(ptr);
    if (target.is_object() && target.contains("value") && target.contains("unit")) {
        const std::string unit = spec.unit ? *spec.unit : target.at("unit").get<std::string>();
        target["value"] = value;
        target["unit"] = unit;
        return {copy, units::speed_to_mps(value, unit)};
    }
    if (!target.is_number()) {
        throw ValidationError("swept parameter '" + spec.param + "' is not numeric");
    }
    if (spec.unit) {
        throw ValidationError("sweep unit given for non-speed parameter '" + spec.param + "'");
    }
    target = value;
    return {copy, value};
}

struct SweepRow {
    double param{0.0};
    std::optional<ManeuverBounds> bounds;
    Verdict verdict{Verdict::Unknown};
    double connectivity{0.0};
};

/// Evaluates every sweep point (in parallel) and returns rows in sweep order.
[[nodiscard]] inline std::vector<SweepRow> evaluate_sweep(const io::Scenario& base, const SweepSpec& spec,
                                                          const io::ScenarioOverrides& ov)
{
    spec.validate();
    std::vector<std::pair<EncounterConfig, double>> points;
    for (const double value : spec.values) {
        auto [doc, si] = apply_sweep_value(base.document, spec, value);
        points.emplace_back(io::build_config(doc, base.base_dir, ov), si);
    }
    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(points.size());
    for (const auto& point : points) {
        jobs.push_back(std::async(std::launch::async, [&point] {
            SweepRow row;
            row.param = point.second;
            try {
                row.bounds = maneuver_bounds(point.first.scenario);
            } catch (const DomainError&) {
            }
            const EncounterReport report = run_encounter(point.first);
            row.verdict = report.verdict.verdict;
            row.connectivity = report.connectivity_duration;
            return row;
        }));
    }
    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& job : jobs) {
        rows.push_back(job.get());
    }
    return rows;
}

[[nodiscard]] inline std::string sweep_to_csv(const std::vector<SweepRow>& rows)
{
    std::string out = io::kSweepCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += io::full_precision(r.param);
        out += ',';
        out += r.bounds ? io::full_precision(r.bounds->min_time) : std::string("nan");
        out += ',';
        out += r.bounds ? io::full_precision(r.bounds->min_range) : std::string("nan");
        out += ',';
        out += to_string(r.verdict);
        out += ',';
        out += io::full_precision(r.connectivity);
        out += '\n';
    }
    return out;
}

inline int cmd_sweep(const CommonOptions& opt, const SweepSpec& spec, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        spec.validate();
        const auto sc = io::load_scenario(opt.scenario, opt.overrides);
        const std::string csv = sweep_to_csv(evaluate_sweep(sc, spec, opt.overrides));
        if (spec.output) {
            io::write_file(*spec.output, csv);
        } else {
            out << csv;
        }
        return kOk;
    });
}

// ---------------------------------------------------------------- repro

struct ReproRow {
    std::string name;
    std::string expected;
    std::string actual;
    bool pass{false};
};

/// Self-check against the shipped presets in `dir`.
[[nodiscard]] inline std::vector<ReproRow> repro_rows(const fs::path& dir)
{
    std::vector<ReproRow> rows;
    auto numeric = [&](std::string name, double expected, double tol, const std::function<double()>& actual) {
        ReproRow row{std::move(name), io::fixed(expected, 2) + " +/- " + io::full_precision(tol), "", false};
        try {
            const double a = actual();
            row.actual = io::full_precision(a);
            row.pass = std::abs(a - expected) <= tol;
        } catch (const std::exception& e) {
            row.actual = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
    };
    auto check = [&](std::string name, std::string expected, const std::function<std::pair<std::string, bool>()>& f) {
        ReproRow row{std::move(name), std::move(expected), "", false};
        try {
            std::tie(row.actual, row.pass) = f();
        } catch (const std::exception& e) {
            row.actual = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
    };

    std::optional<PassScenario> scenario;
    try {
        scenario = io::parse_pass_scenario(io::read_json(dir / "paper_55mph.json").at("pass_scenario"));
    } catch (const std::exception& e) {
        rows.push_back({"scenario paper_55mph.json", "loadable", std::string("error: ") + e.what(), false});
    }
    std::optional<RangeTable> inside;
    std::optional<RangeTable> rooftop;
    try {
        inside = io::load_range_table(dir / "inside_channel.json");
    } catch (const std::exception& e) {
        rows.push_back({"calibration inside_channel.json", "loadable", std::string("error: ") + e.what(), false});
    }
    try {
        rooftop = io::load_range_table(dir / "rooftop_channel.json");
    } catch (const std::exception& e) {
        rows.push_back({"calibration rooftop_channel.json", "loadable", std::string("error: ") + e.what(), false});
    }

    auto need = [](const auto& opt, const char* what) -> const auto& {
        if (!opt) {
            throw Error(std::string(what) + " unavailable");
        }
        return *opt;
    };
    const double mph55 = units::mph_to_mps(55);
    const double mph70 = units::mph_to_mps(70);

    numeric("bounds min_pass_time_s @55mph", 12.16, 0.05, [&] { return min_pass_time(need(scenario, "scenario")); });
    numeric("bounds min_comm_range_m @55mph", 712.4, 2.0, [&] { return min_comm_range(need(scenario, "scenario")); });

    struct Cell {
        const char* name;
        Direction dir;
        double speed;
        double expected;
    };
    for (const Cell& c : {Cell{"range inside_vehicle forward @55mph", Direction::Forward, mph55, 466.0},
                          Cell{"range inside_vehicle forward @70mph", Direction::Forward, mph70, 401.0},
                          Cell{"range inside_vehicle backward @55mph", Direction::Backward, mph55, 327.0},
                          Cell{"range inside_vehicle backward @70mph", Direction::Backward, mph70, 400.0}}) {
        numeric(c.name, c.expected, 0.0,
                [&] { return need(inside, "inside calibration").max_range(Placement::InsideVehicle, c.dir, c.speed); });
    }
    for (const auto& [label, speed] : {std::pair{"@55mph", mph55}, std::pair{"@70mph", mph70}}) {
        check(std::string("rooftop forward~backward ") + label, "relative difference <= 0.05", [&, speed = speed] {
            const auto& t = need(rooftop, "rooftop calibration");
            const double f = t.max_range(Placement::Rooftop, Direction::Forward, speed);
            const double b = t.max_range(Placement::Rooftop, Direction::Backward, speed);
            const double rel = std::abs(f - b) / std::max(f, b);
            return std::pair{io::full_precision(rel), rel <= 0.05};
        });
    }
    check("verdict inside_vehicle @55mph", "Infeasible", [&] {
        const double r = need(inside, "inside calibration").max_range(Placement::InsideVehicle, Direction::Forward, mph55);
        const auto v = feasibility(need(scenario, "scenario"), r);
        return std::pair{std::string(to_string(v.verdict)), v.verdict == Verdict::Infeasible};
    });
    check("verdict rooftop @55mph", "SafePassFeasible", [&] {
        const double r = need(rooftop, "rooftop calibration").max_range(Placement::Rooftop, Direction::Forward, mph55);
        const auto v = feasibility(need(scenario, "scenario"), r);
        return std::pair{std::string(to_string(v.verdict)), v.verdict == Verdict::SafePassFeasible};
    });
    return rows;
}

inline int cmd_repro(bool json_output, std::ostream& out, std::ostream& err, const fs::path& dir = io::data_dir())
{
    const auto rows = repro_rows(dir);
    bool all = true;
    for (const auto& r : rows) {
        all = all && r.pass;
    }
    if (json_output) {
        json list = json::array();
        for (const auto& r : rows) {
            list.push_back({{"check", r.name}, {"expected", r.expected}, {"actual", r.actual}, {"pass", r.pass}});
        }
        out << json{{"rows", list}, {"pass", all}}.dump(2) << '\n';
    } else {
        for (const auto& r : rows) {
            out << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  expected " << r.expected << "  actual " << r.actual
                << '\n';
        }
        out << (all ? "repro: all rows PASS" : "repro: MISMATCH") << '\n';
    }
    if (!all) {
        for (const auto& r : rows) {
            if (!r.pass) {
                err << "repro mismatch: " << r.name << '\n';
            }
        }
        return kReproMismatch;
    }
    return kOk;
}

} // namespace passfeas::cli
