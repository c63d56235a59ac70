#pragma once

#include "ccstat/dataset.hpp"
#include "ccstat/error.hpp"
#include "ccstat/estimators.hpp"
#include "ccstat/filters.hpp"
#include "ccstat/image.hpp"
#include "ccstat/image_io.hpp"
#include "ccstat/metrics.hpp"
#include "ccstat/report.hpp"
#include "ccstat/tuning.hpp"
