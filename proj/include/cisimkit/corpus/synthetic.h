// Copyright 2026 The cisimkit Authors.
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

#ifndef CISIMKIT_CORPUS_SYNTHETIC_H_
#define CISIMKIT_CORPUS_SYNTHETIC_H_

#include <cstdint>

#include "cisimkit/dsp/audio.h"

namespace cisimkit::corpus {

// Speech-like test material for running the pipeline without a licensed
// corpus. An utterance is a run of syllables separated by short pauses; each
// syllable is a harmonic complex on a gliding F0 contour (level, rising,
// dipping or falling, like lexical tones) shaped by three formant
// resonances, optionally led by a fricative noise burst.
dsp::AudioBuffer SyntheticUtterance(std::uint64_t seed, double seconds, int fs = dsp::kProcessingRate,
                                    double rms = 0.05);

// Stationary masker: engine-like firing harmonics over low-passed noise.
dsp::AudioBuffer EngineNoise(std::uint64_t seed, double seconds, int fs = dsp::kProcessingRate);

// Non-stationary masker: traffic-like noise whose level and spectrum swing
// over time, with intermittent horn and pass-by events.
dsp::AudioBuffer StreetNoise(std::uint64_t seed, double seconds, int fs = dsp::kProcessingRate);

}  // namespace cisimkit::corpus

#endif  // CISIMKIT_CORPUS_SYNTHETIC_H_
