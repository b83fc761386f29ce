// core/image_io.hpp

// Copyright 2026 The voiceface Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VF_CORE_IMAGE_IO_HPP_
#define VF_CORE_IMAGE_IO_HPP_

#include <string>

#include "core/tensor.hpp"

namespace vf {

// 8-bit RGB PNG. Pixels are [H,W,3] doubles in [0,1]; writing quantizes
// with round(x*255) so a write/read round trip is stable. Output bytes are
// deterministic for a given pixel tensor.
void write_png(const std::string& path, const Tensor& pixels);
Tensor read_png(const std::string& path);

}  // namespace vf

#endif  // VF_CORE_IMAGE_IO_HPP_
