#pragma once

// Umbrella header.

#include "randeriv/types.hpp"
#include "randeriv/rng.hpp"
#include "randeriv/numerics.hpp"
#include "randeriv/aberth.hpp"
#include "randeriv/matching.hpp"
#include "randeriv/sampling.hpp"
#include "randeriv/operator.hpp"
#include "randeriv/metrics.hpp"
#include "randeriv/rmt.hpp"
#include "randeriv/experiments/manifest.hpp"
#include "randeriv/experiments/output.hpp"
#include "randeriv/experiments/thread_pool.hpp"
#include "randeriv/experiments/runner.hpp"
#include "randeriv/experiments/selftest.hpp"
