#pragma once

#include "dait/boxtrace.hpp"
#include "dait/conditions.hpp"
#include "dait/engine.hpp"
#include "dait/families.hpp"
#include "dait/harness.hpp"
#include "dait/json_io.hpp"
#include "dait/pseudocycle.hpp"
#include "dait/schedule.hpp"
#include "dait/types.hpp"
