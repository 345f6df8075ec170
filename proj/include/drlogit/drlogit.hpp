#pragma once

#include "drlogit/core.hpp"
#include "drlogit/efficiency.hpp"
#include "drlogit/hd_sparse.hpp"
#include "drlogit/io.hpp"
#include "drlogit/learners.hpp"
#include "drlogit/link.hpp"
#include "drlogit/lowdim.hpp"
#include "drlogit/ml_crossfit.hpp"
#include "drlogit/parallel.hpp"
#include "drlogit/prox.hpp"
#include "drlogit/rng.hpp"
#include "drlogit/simulate.hpp"
#include "drlogit/types.hpp"
