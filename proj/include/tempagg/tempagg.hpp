#pragma once
// Umbrella header for the temporal-aggregation library.

#include "tempagg/aggregation.hpp"
#include "tempagg/bench.hpp"
#include "tempagg/certify.hpp"
#include "tempagg/classifier.hpp"
#include "tempagg/ingest.hpp"
#include "tempagg/manifest.hpp"
#include "tempagg/oracle.hpp"
#include "tempagg/timeline.hpp"
#include "tempagg/util.hpp"
