// Copyright 2026 The kwsv Authors. All rights reserved.
//
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "kwsv/asv.hpp"
#include "kwsv/bundle.hpp"
#include "kwsv/bundle_io.hpp"
#include "kwsv/config.hpp"
#include "kwsv/error.hpp"
#include "kwsv/eval.hpp"
#include "kwsv/ks.hpp"
#include "kwsv/layers.hpp"
#include "kwsv/memory_budget.hpp"
#include "kwsv/metrics.hpp"
#include "kwsv/mfcc.hpp"
#include "kwsv/pipeline.hpp"
#include "kwsv/reference_models.hpp"
#include "kwsv/service.hpp"
#include "kwsv/stream_buffer.hpp"
#include "kwsv/stream_config.hpp"
#include "kwsv/tensor.hpp"
#include "kwsv/wav.hpp"
