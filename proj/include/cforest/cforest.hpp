#pragma once

#include "cforest/baselines.hpp"
#include "cforest/base_cluster.hpp"
#include "cforest/core.hpp"
#include "cforest/data.hpp"
#include "cforest/ensemble.hpp"
#include "cforest/growth.hpp"
#include "cforest/metrics.hpp"
#include "cforest/perturbation.hpp"
#include "cforest/profile.hpp"
#include "cforest/spectral.hpp"
