#pragma once

// Jointly symmetric one-parameter binary distributions on star graphs:
// exact joint/marginal/conditional tables, Kronecker-structured moment and
// interaction transforms, dependence measures, and estimation of the
// dependence parameter with the root observed or latent.

#include "ringdist/counts.hpp"
#include "ringdist/csv.hpp"
#include "ringdist/dependence.hpp"
#include "ringdist/errors.hpp"
#include "ringdist/estimation.hpp"
#include "ringdist/kron.hpp"
#include "ringdist/model.hpp"
#include "ringdist/rng.hpp"
#include "ringdist/simulate.hpp"
#include "ringdist/transforms.hpp"
