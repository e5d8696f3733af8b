#ifndef DYNPERC_DYNPERC_HPP
#define DYNPERC_DYNPERC_HPP

#include "dynperc/config.hpp"
#include "dynperc/csv.hpp"
#include "dynperc/effective_radius.hpp"
#include "dynperc/environment.hpp"
#include "dynperc/estimators.hpp"
#include "dynperc/exact_oracle.hpp"
#include "dynperc/experiments.hpp"
#include "dynperc/geodesics.hpp"
#include "dynperc/influence.hpp"
#include "dynperc/lattice.hpp"
#include "dynperc/lattice_animal.hpp"
#include "dynperc/parallel.hpp"
#include "dynperc/percolation.hpp"
#include "dynperc/polynomial.hpp"
#include "dynperc/rng.hpp"
#include "dynperc/statistics.hpp"

#endif  // DYNPERC_DYNPERC_HPP
