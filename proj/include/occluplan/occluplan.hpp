#pragma once

// Umbrella header for the whole library.

#include "occluplan/bitmask.hpp"
#include "occluplan/core.hpp"
#include "occluplan/harness.hpp"
#include "occluplan/inpaint.hpp"
#include "occluplan/losses.hpp"
#include "occluplan/metrics.hpp"
#include "occluplan/morphology.hpp"
#include "occluplan/occlusion.hpp"
#include "occluplan/planner.hpp"
#include "occluplan/semantic_grid.hpp"
#include "occluplan/skeleton.hpp"
