#pragma once

#include "triway/model.hpp"
#include "triway/bounds.hpp"
#include "triway/region.hpp"
#include "triway/report.hpp"
#include "triway/rng.hpp"
#include "triway/sim.hpp"
#include "triway/experiments.hpp"
#include "triway/io.hpp"
