#pragma once

#include <optional>

#include "oracles.hpp"
#include "passfeas/channel_model.hpp"
#include "passfeas/sim_engine.hpp"

namespace passfeas::fixtures {

inline EncounterConfig encounter(Placement placement, double mph1 = 55.0, double mph2 = 55.0,
                                 std::optional<TerrainProfile> terrain = std::nullopt,
                                 DeliveryModel delivery = Deterministic{})
{
    EncounterConfig cfg;
    cfg.scenario = oracle::paper_scenario(mph1);
    cfg.scenario.v2 = units::mph_to_mps(mph2);
    cfg.channel = ChannelModel(paper_calibration(), std::move(terrain), delivery);
    cfg.placement = placement;
    cfg.initial_separation = 1500.0;
    cfg.beacon_interval = 0.1;
    cfg.time_step = 0.01;
    cfg.duration_limit = 600.0;
    return cfg;
}

/// Hill centred on 750 m; symmetric antennas see each other within 300 m.
inline TerrainProfile crest_terrain(double antenna_height = 1.5)
{
    return TerrainProfile({{-1000.0, 0.0}, {450.0, 0.0}, {600.0, 20.0}, {750.0, 21.5}, {900.0, 20.0},
                           {1050.0, 0.0}, {3000.0, 0.0}},
                          antenna_height);
}

} // namespace passfeas::fixtures
