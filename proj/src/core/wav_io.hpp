// core/wav_io.hpp

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

#ifndef VF_CORE_WAV_IO_HPP_
#define VF_CORE_WAV_IO_HPP_

#include <string>
#include <vector>

#include "core/common.hpp"

namespace vf {

// 16-bit PCM mono WAV.
void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate);

struct WavData {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 0;
};
WavData read_wav(const std::string& path);

}  // namespace vf

#endif  // VF_CORE_WAV_IO_HPP_
