#pragma once

#include "dcsim/engine.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/migration.hpp"
#include "dcsim/model.hpp"
#include "dcsim/placement.hpp"
#include "dcsim/power.hpp"
#include "dcsim/report.hpp"
#include "dcsim/rng.hpp"
#include "dcsim/scenario.hpp"
#include "dcsim/types.hpp"
#include "dcsim/workload.hpp"
