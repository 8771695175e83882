#pragma once

// Directed polymers in a Gaussian random environment: exact partition functions,
// exact Gibbs sampling, overlap statistics, free-energy estimation and
// path-localization tooling.

#include "dpre/lattice.hpp"
#include "dpre/partition.hpp"
#include "dpre/environment.hpp"
#include "dpre/profile.hpp"
#include "dpre/transfer_matrix.hpp"
#include "dpre/enumeration.hpp"
#include "dpre/overlap.hpp"
#include "dpre/replica_overlap.hpp"
#include "dpre/free_energy.hpp"
#include "dpre/localization.hpp"
#include "dpre/planting.hpp"
