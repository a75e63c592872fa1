#pragma once

#include "sybil/cake.hpp"
#include "sybil/commitment.hpp"
#include "sybil/csv.hpp"
#include "sybil/equilibrium.hpp"
#include "sybil/error.hpp"
#include "sybil/experiments.hpp"
#include "sybil/game.hpp"
#include "sybil/numeric.hpp"
#include "sybil/rdm.hpp"
#include "sybil/ring.hpp"
#include "sybil/rng.hpp"
