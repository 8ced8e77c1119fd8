#pragma once

// Umbrella header for the library (the CLI lives in cli.hpp).

#include "frachenon/angular_kernel.hpp"
#include "frachenon/energetics.hpp"
#include "frachenon/errors.hpp"
#include "frachenon/extension.hpp"
#include "frachenon/json_writer.hpp"
#include "frachenon/ode.hpp"
#include "frachenon/profile.hpp"
#include "frachenon/quadrature.hpp"
#include "frachenon/regimes.hpp"
#include "frachenon/special_functions.hpp"
