#pragma once

#include "selpred/bounds.hpp"
#include "selpred/dgp.hpp"
#include "selpred/lsq.hpp"
#include "selpred/modelsel.hpp"
#include "selpred/oracle.hpp"
#include "selpred/parallel.hpp"
#include "selpred/predict.hpp"
#include "selpred/rng.hpp"
#include "selpred/special.hpp"
#include "selpred/stats.hpp"
