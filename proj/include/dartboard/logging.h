// Copyright 2026 The Dartboard Authors.
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

#ifndef DARTBOARD_LOGGING_H_
#define DARTBOARD_LOGGING_H_

#include "spdlog/spdlog.h"

namespace dartboard {

// Process-wide stderr logger. The level comes from DARTBOARD_LOG
// (trace|debug|info|warn|error|critical|off, default warn).
spdlog::logger& Log();

}  // namespace dartboard

#endif  // DARTBOARD_LOGGING_H_
