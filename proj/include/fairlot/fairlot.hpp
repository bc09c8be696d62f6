#pragma once

// Fairness-controlled selection over the optimal solutions of agent-indexed
// integer linear programs: partitioning, enumeration, column-generation
// rules (leximin, Nash, k-norms), random serial dictatorship, benchmark
// instance families, and audits.

#include "fairlot/backend.hpp"
#include "fairlot/bench.hpp"
#include "fairlot/colgen.hpp"
#include "fairlot/enumeration.hpp"
#include "fairlot/instances.hpp"
#include "fairlot/json_io.hpp"
#include "fairlot/mip.hpp"
#include "fairlot/model.hpp"
#include "fairlot/ops.hpp"
#include "fairlot/oracle.hpp"
#include "fairlot/partition.hpp"
#include "fairlot/rng.hpp"
#include "fairlot/rsd.hpp"
#include "fairlot/simplex.hpp"
