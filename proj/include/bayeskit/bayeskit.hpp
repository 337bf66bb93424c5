// Copyright 2026 The bayeskit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef BAYESKIT_BAYESKIT_HPP
#define BAYESKIT_BAYESKIT_HPP

#include "bayeskit/core.hpp"
#include "bayeskit/gp/kernel.hpp"
#include "bayeskit/gp/mean.hpp"
#include "bayeskit/gp/posterior.hpp"
#include "bayeskit/gp/hyperfit.hpp"
#include "bayeskit/acqopt.hpp"
#include "bayeskit/acq/ei.hpp"
#include "bayeskit/acq/kg.hpp"
#include "bayeskit/acq/kgcp.hpp"
#include "bayeskit/acq/parallel.hpp"
#include "bayeskit/acq/entropy.hpp"
#include "bayeskit/acq/spec.hpp"
#include "bayeskit/driver.hpp"
#include "bayeskit/bench.hpp"
#include "bayeskit/service/serialize.hpp"
#include "bayeskit/service/campaign.hpp"

#endif  // BAYESKIT_BAYESKIT_HPP
