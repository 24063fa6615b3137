#pragma once

// Estimators of the theta-weighted measure and its quenched average.

#include "looptree/cluster.hpp"
#include "looptree/estimate.hpp"
#include "looptree/importance.hpp"
#include "looptree/mcmc.hpp"
#include "looptree/quenched.hpp"
