#pragma once

// Umbrella header for the TD detection and analytics toolkit.

#include "tdscan/analytics.hpp"
#include "tdscan/augment.hpp"
#include "tdscan/benchmark.hpp"
#include "tdscan/corpus.hpp"
#include "tdscan/eigen.hpp"
#include "tdscan/error.hpp"
#include "tdscan/eval.hpp"
#include "tdscan/hierarchy.hpp"
#include "tdscan/learn.hpp"
#include "tdscan/pipeline.hpp"
#include "tdscan/report.hpp"
#include "tdscan/rng.hpp"
#include "tdscan/sentences.hpp"
#include "tdscan/textfeat.hpp"
#include "tdscan/types.hpp"
