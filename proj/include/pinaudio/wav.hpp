#pragma once

#include <string>

#include "pinaudio/audio.hpp"

namespace pinaudio {

enum class WavEncoding { pcm16, float32 };

/// Mono RIFF/WAVE. pcm16 clips to [-1, 1].
void write_wav(const std::string& path, const AudioClip& clip, WavEncoding encoding = WavEncoding::float32);

/// Reads PCM 16-bit or IEEE float 32-bit (plain or extensible header); the
/// first channel of multi-channel files. Throws DataError with the path on
/// malformed input.
AudioClip read_wav(const std::string& path);

}  // namespace pinaudio
