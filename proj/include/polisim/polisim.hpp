#pragma once

// Convenience umbrella for the whole library.

#include "polisim/agent.hpp"
#include "polisim/deliberation.hpp"
#include "polisim/errors.hpp"
#include "polisim/metrics.hpp"
#include "polisim/norm_parser.hpp"
#include "polisim/norms.hpp"
#include "polisim/population.hpp"
#include "polisim/rng.hpp"
#include "polisim/runner.hpp"
#include "polisim/scenario.hpp"
#include "polisim/world.hpp"
