#pragma once

#include "tsfeat/learn/classifier.hpp"
#include "tsfeat/learn/folds.hpp"
#include "tsfeat/learn/inference.hpp"
#include "tsfeat/learn/metrics.hpp"
#include "tsfeat/learn/multi_feature.hpp"
#include "tsfeat/learn/preprocess.hpp"
#include "tsfeat/learn/top_features.hpp"
#include "tsfeat/learn/univariate.hpp"
