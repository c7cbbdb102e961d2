#pragma once

#include "frozencore/types.hpp"
#include "frozencore/rng.hpp"
#include "frozencore/lattice.hpp"
#include "frozencore/couplings.hpp"
#include "frozencore/parallel.hpp"
#include "frozencore/pseudospin.hpp"
#include "frozencore/bath.hpp"
#include "frozencore/census.hpp"
#include "frozencore/experiment.hpp"
#include "frozencore/config.hpp"
#include "frozencore/output.hpp"
