#pragma once

#include "cbem/cb_model.hpp"
#include "cbem/em_estimator.hpp"
#include "cbem/errors.hpp"
#include "cbem/io.hpp"
#include "cbem/oracle.hpp"
#include "cbem/plot_emitter.hpp"
#include "cbem/random.hpp"
#include "cbem/sim_harness.hpp"
