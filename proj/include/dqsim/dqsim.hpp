#pragma once

// Everything in one include.

#include "dqsim/qcore.hpp"
#include "dqsim/circuit.hpp"
#include "dqsim/qasm.hpp"
#include "dqsim/models.hpp"
#include "dqsim/evolve.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/tomo.hpp"
#include "dqsim/mitigate.hpp"
#include "dqsim/experiment.hpp"
