#pragma once

#include "trajopt/error.hpp"
#include "trajopt/majorization.hpp"
#include "trajopt/core.hpp"
#include "trajopt/simplex.hpp"
#include "trajopt/polytope.hpp"
#include "trajopt/transforms.hpp"
#include "trajopt/trajectory.hpp"
#include "trajopt/lift.hpp"
#include "trajopt/jacobi.hpp"
#include "trajopt/conserved.hpp"
#include "trajopt/cooling.hpp"
#include "trajopt/oracle.hpp"
