#pragma once

// Umbrella header for the whole library.

#include "cenas/carbon.hpp"
#include "cenas/cli.hpp"
#include "cenas/config.hpp"
#include "cenas/errors.hpp"
#include "cenas/moo.hpp"
#include "cenas/partition.hpp"
#include "cenas/scheduler.hpp"
#include "cenas/search_space.hpp"
#include "cenas/simulator.hpp"
