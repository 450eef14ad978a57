#pragma once

#include "qgrid/analysis.hpp"
#include "qgrid/bound_bisect.hpp"
#include "qgrid/bounds.hpp"
#include "qgrid/grid_search.hpp"
#include "qgrid/grover_core.hpp"
#include "qgrid/quadrature.hpp"
#include "qgrid/random.hpp"
#include "qgrid/trajectory.hpp"
#include "qgrid/tuple_space.hpp"
