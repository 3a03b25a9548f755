// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ncstat/attribution.hpp"
#include "ncstat/binomial.hpp"
#include "ncstat/ingest.hpp"
#include "ncstat/metrics.hpp"
#include "ncstat/random.hpp"
#include "ncstat/report.hpp"
#include "ncstat/simulate.hpp"
#include "ncstat/stats.hpp"
#include "ncstat/table.hpp"
#include "ncstat/timestamp.hpp"
#include "ncstat/windowing.hpp"
