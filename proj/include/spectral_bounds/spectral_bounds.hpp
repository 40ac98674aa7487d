#pragma once

// Everything: fields and domains, special functions, spectra, the finite-volume
// solver, the bounds, and the scenario harness.

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/expr.hpp"
#include "spectral_bounds/domain.hpp"
#include "spectral_bounds/problem.hpp"
#include "spectral_bounds/special_functions.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/spectrum.hpp"
#include "spectral_bounds/report.hpp"
#include "spectral_bounds/fd_solver.hpp"
#include "spectral_bounds/bounds.hpp"
#include "spectral_bounds/phase_space.hpp"
#include "spectral_bounds/homogeneous.hpp"
#include "spectral_bounds/avp.hpp"
#include "spectral_bounds/scenario.hpp"
#include "spectral_bounds/run.hpp"
#include "spectral_bounds/io.hpp"
#include "spectral_bounds/selftest.hpp"
