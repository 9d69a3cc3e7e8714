#pragma once

#include "crtrack/benchmark.hpp"
#include "crtrack/combinatorial.hpp"
#include "crtrack/combinatorial_oracle.hpp"
#include "crtrack/dbn.hpp"
#include "crtrack/error.hpp"
#include "crtrack/geometry.hpp"
#include "crtrack/image.hpp"
#include "crtrack/likelihood.hpp"
#include "crtrack/particle.hpp"
#include "crtrack/resampling.hpp"
#include "crtrack/rng.hpp"
#include "crtrack/sequence.hpp"
#include "crtrack/svg_plot.hpp"
#include "crtrack/tracker.hpp"
