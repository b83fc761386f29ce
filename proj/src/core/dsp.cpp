// core/dsp.cpp

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

#include "core/dsp.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace vf {

std::vector<double> hann_window(i64 n) {
  VF_CHECK(n >= 1, "hann_window needs n >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (i64 i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

Tensor stft_magnitude(const std::vector<double>& samples, const StftConfig& cfg) {
  VF_CHECK_CONFIG(cfg.window_length >= 1 && cfg.hop_length >= 1 && cfg.fft_size >= cfg.window_length,
                  "invalid stft config");
  i64 len = static_cast<i64>(samples.size());
  VF_CHECK_INPUT(len >= cfg.window_length, "waveform shorter than stft window");

  i64 frames = 1 + (len - cfg.window_length) / cfg.hop_length;
  i64 bins = cfg.fft_size / 2 + 1;
  std::vector<double> win = hann_window(cfg.window_length);

  double* in = fftw_alloc_real(static_cast<std::size_t>(cfg.fft_size));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(bins));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(cfg.fft_size), in, out, FFTW_ESTIMATE);
  VF_CHECK(plan != nullptr, "fftw plan creation failed");

  Tensor mag({bins, frames});
  for (i64 t = 0; t < frames; ++t) {
    i64 start = t * cfg.hop_length;
    for (i64 i = 0; i < cfg.window_length; ++i)
      in[i] = samples[static_cast<std::size_t>(start + i)] * win[static_cast<std::size_t>(i)];
    for (i64 i = cfg.window_length; i < cfg.fft_size; ++i) in[i] = 0.0;
    fftw_execute(plan);
    for (i64 f = 0; f < bins; ++f)
      mag.at(f, t) = std::hypot(out[f][0], out[f][1]);
  }

  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return mag;
}

}  // namespace vf
