// Copyright 2026 The stochtr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stochtr/error.hpp"

namespace stochtr {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::argument: return "argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::domain: return "domain";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::state: return "state";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::format: return "format";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace stochtr
