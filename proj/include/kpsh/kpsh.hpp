#pragma once

#include "kpsh/analysis.hpp"
#include "kpsh/barriers.hpp"
#include "kpsh/complex_calculus.hpp"
#include "kpsh/core.hpp"
#include "kpsh/grid.hpp"
#include "kpsh/io.hpp"
#include "kpsh/operators.hpp"
#include "kpsh/problems.hpp"
#include "kpsh/sampling.hpp"
#include "kpsh/solver.hpp"
#include "kpsh/symmetric_functions.hpp"
#include "kpsh/verify.hpp"
