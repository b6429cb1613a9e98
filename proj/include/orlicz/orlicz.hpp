#pragma once

#include "orlicz/core.hpp"
#include "orlicz/report.hpp"
#include "orlicz/spatial_function.hpp"
#include "orlicz/convex_envelope.hpp"
#include "orlicz/scalar_nfunction.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/conjugate.hpp"
#include "orlicz/nfunction_checks.hpp"
#include "orlicz/modular.hpp"
#include "orlicz/operators.hpp"
#include "orlicz/mollify.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/solver.hpp"
#include "orlicz/diagnostics.hpp"
