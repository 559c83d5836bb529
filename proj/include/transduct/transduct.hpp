#pragma once

// Umbrella header.

#include "transduct/baselines.hpp"
#include "transduct/core.hpp"
#include "transduct/dynamics.hpp"
#include "transduct/errors.hpp"
#include "transduct/evaluate.hpp"
#include "transduct/io.hpp"
#include "transduct/metrics.hpp"
#include "transduct/pipeline.hpp"
#include "transduct/priors.hpp"
#include "transduct/similarity.hpp"
#include "transduct/synthetic.hpp"
