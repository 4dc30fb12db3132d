#pragma once

#include "sasc/grid.hpp"
#include "sasc/io.hpp"
#include "sasc/ops.hpp"
#include "sasc/sparsity.hpp"
#include "sasc/nonlocal.hpp"
#include "sasc/priornet.hpp"
#include "sasc/stages.hpp"
#include "sasc/solver.hpp"
