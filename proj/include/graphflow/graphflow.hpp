#pragma once

#include "graphflow/calibrate.hpp"
#include "graphflow/errors.hpp"
#include "graphflow/experiments.hpp"
#include "graphflow/flow.hpp"
#include "graphflow/graph.hpp"
#include "graphflow/linsolve.hpp"
#include "graphflow/operators.hpp"
#include "graphflow/parallel.hpp"
#include "graphflow/pgap.hpp"
#include "graphflow/potential.hpp"
#include "graphflow/rng.hpp"
#include "graphflow/schemes.hpp"
#include "graphflow/spectral.hpp"
