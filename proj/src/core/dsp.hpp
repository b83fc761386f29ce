// core/dsp.hpp

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

#ifndef VF_CORE_DSP_HPP_
#define VF_CORE_DSP_HPP_

#include <vector>

#include "core/tensor.hpp"

namespace vf {

struct StftConfig {
  i64 window_length = 400;
  i64 hop_length = 160;
  i64 fft_size = 512;

  bool operator==(const StftConfig&) const = default;
};

// Magnitude STFT with a periodic Hann window. Output is [F, T] with
// F = fft_size/2 + 1 and T = 1 + floor((len - window) / hop).
// Requires len >= window_length.
Tensor stft_magnitude(const std::vector<double>& samples, const StftConfig& cfg);

std::vector<double> hann_window(i64 n);

}  // namespace vf

#endif  // VF_CORE_DSP_HPP_
