#pragma once

// Dynamics of the square billiard with the contracting reflection law
// theta' = lambda * theta: maps, linearization, invariant manifolds,
// periodic-orbit families and bifurcation constants.

#include "sqb/bifurcation.hpp"
#include "sqb/common.hpp"
#include "sqb/config.hpp"
#include "sqb/explore.hpp"
#include "sqb/full_map.hpp"
#include "sqb/jacobian.hpp"
#include "sqb/manifolds.hpp"
#include "sqb/parallel.hpp"
#include "sqb/periodic.hpp"
#include "sqb/reduced_map.hpp"
#include "sqb/rng.hpp"
#include "sqb/rootfind.hpp"
#include "sqb/series.hpp"
