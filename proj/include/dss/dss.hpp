#pragma once

#include "dss/baselines.hpp"
#include "dss/densities.hpp"
#include "dss/em.hpp"
#include "dss/error.hpp"
#include "dss/experiments/forecast.hpp"
#include "dss/experiments/metrics.hpp"
#include "dss/experiments/panel_csv.hpp"
#include "dss/experiments/replications.hpp"
#include "dss/experiments/synthetic.hpp"
#include "dss/io.hpp"
#include "dss/params.hpp"
#include "dss/penalty.hpp"
#include "dss/sampler.hpp"
#include "dss/threshold.hpp"
#include "dss/types.hpp"
