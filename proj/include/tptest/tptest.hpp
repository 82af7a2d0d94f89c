// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tptest/analysis.hpp"
#include "tptest/dbm.hpp"
#include "tptest/error.hpp"
#include "tptest/harness.hpp"
#include "tptest/net.hpp"
#include "tptest/net_format.hpp"
#include "tptest/scheduler.hpp"
#include "tptest/semantics.hpp"
#include "tptest/sscg.hpp"
#include "tptest/suite_json.hpp"
#include "tptest/testgen.hpp"
#include "tptest/time.hpp"
