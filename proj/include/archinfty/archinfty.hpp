#pragma once

// Memory-structure analysis for stationary ARCH(infinity) processes:
// kernels, resolvents, stationarity conditions, autocovariances, decay-rate
// diagnostics and Monte Carlo cross-validation.

#include "archinfty/asymptotics.hpp"
#include "archinfty/autocovariance.hpp"
#include "archinfty/common.hpp"
#include "archinfty/io.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"
#include "archinfty/simulate.hpp"
#include "archinfty/stationarity.hpp"
