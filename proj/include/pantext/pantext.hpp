/* Copyright (c) 2026 The PanText Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

// Umbrella header.

#include "pantext/anchors.hpp"
#include "pantext/config.hpp"
#include "pantext/detection_json.hpp"
#include "pantext/error.hpp"
#include "pantext/evaluation.hpp"
#include "pantext/geometry.hpp"
#include "pantext/ground_truth.hpp"
#include "pantext/image.hpp"
#include "pantext/inference.hpp"
#include "pantext/io.hpp"
#include "pantext/losses.hpp"
#include "pantext/network.hpp"
#include "pantext/nms.hpp"
#include "pantext/random.hpp"
#include "pantext/roi_align.hpp"
#include "pantext/tensor.hpp"
#include "pantext/weights_io.hpp"
