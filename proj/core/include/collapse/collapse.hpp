#pragma once

#include "collapse/adam.hpp"
#include "collapse/checkpoint.hpp"
#include "collapse/config.hpp"
#include "collapse/csv.hpp"
#include "collapse/dataset.hpp"
#include "collapse/diagnostics.hpp"
#include "collapse/error.hpp"
#include "collapse/experiment.hpp"
#include "collapse/mlp.hpp"
#include "collapse/mog.hpp"
#include "collapse/rng.hpp"
#include "collapse/samplers.hpp"
#include "collapse/schedule.hpp"
#include "collapse/score_model.hpp"
#include "collapse/score_source.hpp"
#include "collapse/seesaw.hpp"
#include "collapse/svg.hpp"
#include "collapse/tid.hpp"
#include "collapse/train.hpp"
#include "collapse/types.hpp"
