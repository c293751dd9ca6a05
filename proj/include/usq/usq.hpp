#pragma once

#include "usq/geometry.hpp"
#include "usq/metrics.hpp"
#include "usq/neighbor_regions.hpp"
#include "usq/quadtree.hpp"
#include "usq/sim.hpp"
#include "usq/skipping.hpp"
#include "usq/strategies.hpp"
#include "usq/suite.hpp"
#include "usq/trial.hpp"
