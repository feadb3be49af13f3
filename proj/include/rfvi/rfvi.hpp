#pragma once

#include "rfvi/config.hpp"
#include "rfvi/csv.hpp"
#include "rfvi/dataset.hpp"
#include "rfvi/error.hpp"
#include "rfvi/experiments.hpp"
#include "rfvi/forest.hpp"
#include "rfvi/forest_io.hpp"
#include "rfvi/importance.hpp"
#include "rfvi/metrics.hpp"
#include "rfvi/parallel.hpp"
#include "rfvi/rng.hpp"
#include "rfvi/selection.hpp"
#include "rfvi/stats.hpp"
#include "rfvi/synthgen.hpp"
