#pragma once

#include "fairsynth/classifier.hpp"
#include "fairsynth/csv.hpp"
#include "fairsynth/dataset.hpp"
#include "fairsynth/error.hpp"
#include "fairsynth/folds.hpp"
#include "fairsynth/generators.hpp"
#include "fairsynth/harness.hpp"
#include "fairsynth/metrics.hpp"
#include "fairsynth/partition.hpp"
#include "fairsynth/random.hpp"
#include "fairsynth/report.hpp"
#include "fairsynth/strategies.hpp"
