#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stylus {

struct Waveform {
  std::vector<double> samples;  // amplitude, nominally in [-1,1]
  int sample_rate = 0;          // Hz

  size_t size() const { return samples.size(); }
  double duration_s() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

void validate(const Waveform& w);  // finite samples, positive rate

// RIFF/WAVE reader. Accepts PCM 16-bit and IEEE float32; stereo is downmixed
// by averaging. If target_rate > 0 and differs from the file rate, the result
// is resampled with a windowed-sinc kernel.
Waveform load_wav(const std::string& path, int target_rate = 0);

enum class WavEncoding { pcm16, float32 };
void save_wav(const std::string& path, const Waveform& w, WavEncoding enc = WavEncoding::pcm16);

// Windowed-sinc resampler (Hann window, 32 zero crossings per side).
// Good to roughly -80 dB aliasing for music material; not a mastering resampler.
Waveform resample(const Waveform& w, int target_rate);

// SNR of `test` against `ref` in dB, optionally ignoring `skip` samples at
// both ends (STFT edge effects live there).
double snr_db(const std::vector<double>& ref, const std::vector<double>& test, size_t skip = 0);

}  // namespace stylus
