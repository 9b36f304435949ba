#pragma once

#include "pfcd/extraction.hpp"
#include "pfcd/feature_table.hpp"
#include "pfcd/graph.hpp"
#include "pfcd/io.hpp"
#include "pfcd/learner.hpp"
#include "pfcd/metrics.hpp"
#include "pfcd/model.hpp"
#include "pfcd/numeric.hpp"
#include "pfcd/synth.hpp"
#include "pfcd/types.hpp"
