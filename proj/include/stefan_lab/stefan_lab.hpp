#pragma once

#include "stefan_lab/errors.hpp"
#include "stefan_lab/version.hpp"
#include "stefan_lab/quadrature.hpp"
#include "stefan_lab/ode.hpp"
#include "stefan_lab/nonlinearity.hpp"
#include "stefan_lab/special_functions.hpp"
#include "stefan_lab/profiles.hpp"
#include "stefan_lab/fbp_solver.hpp"
#include "stefan_lab/classification.hpp"
#include "stefan_lab/asymptotics.hpp"
#include "stefan_lab/config.hpp"
#include "stefan_lab/trace_io.hpp"
