// Copyright 2026 The TEXP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "texp/tensor.h"

namespace texp {

void ConvGeometry::Validate() const {
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument("kernel size must be a positive odd integer");
  }
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  if (padding < 0) throw std::invalid_argument("padding must be non-negative");
}

}  // namespace texp
