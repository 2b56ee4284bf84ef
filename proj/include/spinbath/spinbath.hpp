// Umbrella header for the spinbath library.
#pragma once

#include "spinbath/errors.hpp"
#include "spinbath/numerics.hpp"
#include "spinbath/model.hpp"
#include "spinbath/configspace.hpp"
#include "spinbath/single_qubit.hpp"
#include "spinbath/two_qubit.hpp"
#include "spinbath/oracle.hpp"
#include "spinbath/experiment.hpp"
