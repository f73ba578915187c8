#pragma once

#include "optcontour/analytic_function.hpp"
#include "optcontour/circle.hpp"
#include "optcontour/error.hpp"
#include "optcontour/expr.hpp"
#include "optcontour/grid.hpp"
#include "optcontour/log_value.hpp"
#include "optcontour/pipeline.hpp"
#include "optcontour/quad.hpp"
#include "optcontour/refine.hpp"
#include "optcontour/sew.hpp"
#include "optcontour/special.hpp"
