#pragma once

#include "passfeas/errors.hpp"
#include "passfeas/units.hpp"
#include "passfeas/pass_model.hpp"
#include "passfeas/channel_model.hpp"
#include "passfeas/sim_engine.hpp"
#include "passfeas/scenario_io.hpp"
