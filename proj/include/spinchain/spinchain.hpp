#pragma once

#include "chain_model.hpp"
#include "config.hpp"
#include "drive.hpp"
#include "experiments.hpp"
#include "integrator.hpp"
#include "observables.hpp"
#include "oracle.hpp"
#include "state.hpp"
