/*
 * Copyright 2026 The coughdet Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the License); you may
 * not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an AS IS BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "coughdet/audio.hpp"
#include "coughdet/budget.hpp"
#include "coughdet/cnn.hpp"
#include "coughdet/error.hpp"
#include "coughdet/evaluate.hpp"
#include "coughdet/events.hpp"
#include "coughdet/metrics.hpp"
#include "coughdet/mfcc.hpp"
#include "coughdet/pipeline.hpp"
#include "coughdet/preprocess.hpp"
#include "coughdet/quantize.hpp"
#include "coughdet/weights.hpp"
