#pragma once

#include "lanecheck/acta.hpp"
#include "lanecheck/checker.hpp"
#include "lanecheck/mlsl.hpp"
#include "lanecheck/report.hpp"
#include "lanecheck/scenario.hpp"
#include "lanecheck/traffic.hpp"
#include "lanecheck/verify.hpp"
