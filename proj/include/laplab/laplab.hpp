#pragma once

#include "laplab/assumptions.hpp"
#include "laplab/classical.hpp"
#include "laplab/common.hpp"
#include "laplab/efftime.hpp"
#include "laplab/experiments.hpp"
#include "laplab/field.hpp"
#include "laplab/grid.hpp"
#include "laplab/interp.hpp"
#include "laplab/io.hpp"
#include "laplab/norms.hpp"
#include "laplab/ode.hpp"
#include "laplab/potential.hpp"
#include "laplab/quadrature.hpp"
#include "laplab/radial.hpp"
#include "laplab/sources.hpp"
#include "laplab/weights.hpp"
