#pragma once

#include "ncs/deadbeat.hpp"
#include "ncs/error.hpp"
#include "ncs/generate.hpp"
#include "ncs/instance_file.hpp"
#include "ncs/linalg.hpp"
#include "ncs/lp.hpp"
#include "ncs/planner.hpp"
#include "ncs/report_io.hpp"
#include "ncs/simulate.hpp"
#include "ncs/solve.hpp"
#include "ncs/sparse.hpp"
