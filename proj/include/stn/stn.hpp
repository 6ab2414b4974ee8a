#pragma once

// Umbrella header for the core library (Eigen only). Serialization lives in
// stn/io.hpp, which additionally needs nlohmann/json.

#include "stn/error.hpp"
#include "stn/graph.hpp"
#include "stn/importance.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"
#include "stn/selection.hpp"
#include "stn/solver.hpp"
#include "stn/synth.hpp"
