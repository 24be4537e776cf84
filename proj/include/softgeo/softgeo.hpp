#pragma once

// Soft random geometric graphs on the unit square and cube: pair connection
// profiles, point process sampling, pair-keyed graph sampling, component and
// threshold analysis, isolation-count quadrature, and the radius solver for
// the boundary regimes.

#include "softgeo/analysis.hpp"
#include "softgeo/connection.hpp"
#include "softgeo/geometry.hpp"
#include "softgeo/graph.hpp"
#include "softgeo/harness.hpp"
#include "softgeo/points.hpp"
#include "softgeo/quadrature.hpp"
#include "softgeo/regimes.hpp"
#include "softgeo/rng.hpp"
