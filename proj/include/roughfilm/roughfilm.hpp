/**
 * @file roughfilm.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "roughfilm/cell_heat.hpp"
#include "roughfilm/cell_laplace.hpp"
#include "roughfilm/cell_stokes.hpp"
#include "roughfilm/config.hpp"
#include "roughfilm/errors.hpp"
#include "roughfilm/fem.hpp"
#include "roughfilm/format.hpp"
#include "roughfilm/functions.hpp"
#include "roughfilm/geometry.hpp"
#include "roughfilm/macro_model.hpp"
#include "roughfilm/params.hpp"
#include "roughfilm/quadrature.hpp"
#include "roughfilm/report.hpp"
#include "roughfilm/sparse.hpp"
#include "roughfilm/subcritical.hpp"
