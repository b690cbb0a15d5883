#pragma once

#include "lhom/cell.hpp"
#include "lhom/discretization.hpp"
#include "lhom/eigen.hpp"
#include "lhom/errors.hpp"
#include "lhom/model.hpp"
#include "lhom/poisson.hpp"
#include "lhom/quadrature.hpp"
#include "lhom/sweep.hpp"
