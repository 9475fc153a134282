#include "stylus/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stylus {

void validate(const Waveform& w) {
  if (w.sample_rate <= 0) throw std::invalid_argument("waveform: sample_rate must be > 0");
  for (double v : w.samples)
    if (!std::isfinite(v)) throw std::invalid_argument("waveform: non-finite sample");
}

// ----- little-endian helpers -------------------------------------------------

static uint32_t rd_u32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
static uint16_t rd_u16(const unsigned char* p) { return uint16_t(p[0] | p[1] << 8); }

static void wr_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                        (unsigned char)(v >> 24)};
  f.write(reinterpret_cast<char*>(b), 4);
}
static void wr_u16(std::ofstream& f, uint16_t v) {
  unsigned char b[2] = {(unsigned char)(v), (unsigned char)(v >> 8)};
  f.write(reinterpret_cast<char*>(b), 2);
}

Waveform load_wav(const std::string& path, int target_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 || std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const char* id = reinterpret_cast<const char*>(raw.data() + pos);
    uint32_t len = rd_u32(raw.data() + pos + 4);
    const unsigned char* body = raw.data() + pos + 8;
    if (pos + 8 + len > raw.size()) len = uint32_t(raw.size() - pos - 8);
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      format = rd_u16(body);
      channels = rd_u16(body + 2);
      rate = rd_u32(body + 4);
      bits = rd_u16(body + 14);
      if (format == 0xFFFE && len >= 40) format = rd_u16(body + 24);  // WAVE_FORMAT_EXTENSIBLE
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }
  if (!data || channels == 0 || rate == 0) throw std::runtime_error("missing fmt/data chunk: " + path);

  const bool pcm16 = (format == 1 && bits == 16);
  const bool f32 = (format == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw std::runtime_error("unsupported WAV encoding (want PCM16 or float32): " + path);

  const size_t bytes_per = bits / 8;
  const size_t frames = data_len / (bytes_per * channels);
  Waveform w;
  w.sample_rate = int(rate);
  w.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (uint16_t ch = 0; ch < channels; ++ch) {
      const unsigned char* p = data + (i * channels + ch) * bytes_per;
      if (pcm16) {
        int16_t s = int16_t(rd_u16(p));
        acc += double(s) / 32768.0;
      } else {
        uint32_t u = rd_u32(p);
        float fv;
        std::memcpy(&fv, &u, 4);
        acc += double(fv);
      }
    }
    w.samples[i] = acc / channels;
  }
  validate(w);
  if (target_rate > 0 && target_rate != w.sample_rate) w = resample(w, target_rate);
  return w;
}

void save_wav(const std::string& path, const Waveform& w, WavEncoding enc) {
  validate(w);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  const uint16_t channels = 1;
  const uint16_t bits = (enc == WavEncoding::pcm16) ? 16 : 32;
  const uint16_t fmt = (enc == WavEncoding::pcm16) ? 1 : 3;
  const uint32_t byte_rate = uint32_t(w.sample_rate) * channels * bits / 8;
  const uint32_t data_len = uint32_t(w.samples.size() * bits / 8);

  f.write("RIFF", 4);
  wr_u32(f, 36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, fmt);
  wr_u16(f, channels);
  wr_u32(f, uint32_t(w.sample_rate));
  wr_u32(f, byte_rate);
  wr_u16(f, uint16_t(channels * bits / 8));
  wr_u16(f, bits);
  f.write("data", 4);
  wr_u32(f, data_len);
  for (double v : w.samples) {
    if (enc == WavEncoding::pcm16) {
      double c = std::min(1.0, std::max(-1.0, v));
      int16_t s = int16_t(std::lround(c * 32767.0));
      wr_u16(f, uint16_t(s));
    } else {
      float fv = float(v);
      uint32_t u;
      std::memcpy(&u, &fv, 4);
      wr_u32(f, u);
    }
  }
  if (!f) throw std::runtime_error("short write: " + path);
}

Waveform resample(const Waveform& w, int target_rate) {
  validate(w);
  if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be > 0");
  if (target_rate == w.sample_rate || w.samples.empty()) {
    Waveform out = w;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = double(target_rate) / w.sample_rate;
  const int zero_crossings = 32;
  // cutoff slightly under Nyquist of the lower rate
  const double cutoff = 0.95 * std::min(1.0, ratio);
  const size_t out_len = size_t(std::floor(double(w.samples.size()) * ratio));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len, 0.0);

  const double half_width = zero_crossings / cutoff;
  for (size_t i = 0; i < out_len; ++i) {
    const double center = double(i) / ratio;
    const long lo = long(std::ceil(center - half_width));
    const long hi = long(std::floor(center + half_width));
    double acc = 0.0;
    for (long n = std::max(0L, lo); n <= std::min(long(w.samples.size()) - 1, hi); ++n) {
      const double x = (double(n) - center) * cutoff;
      double sinc = (x == 0.0) ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      const double u = (double(n) - center) / half_width;  // in [-1,1]
      const double win = 0.5 + 0.5 * std::cos(M_PI * u);
      acc += w.samples[n] * sinc * win * cutoff;
    }
    out.samples[i] = acc;
  }
  return out;
}

double snr_db(const std::vector<double>& ref, const std::vector<double>& test, size_t skip) {
  const size_t n = std::min(ref.size(), test.size());
  if (n <= 2 * skip) throw std::invalid_argument("snr_db: nothing left after edge skip");
  double sig = 0.0, err = 0.0;
  for (size_t i = skip; i < n - skip; ++i) {
    sig += ref[i] * ref[i];
    const double d = ref[i] - test[i];
    err += d * d;
  }
  if (err == 0.0) return 300.0;  // exact match; cap instead of +inf
  if (sig == 0.0) return -300.0;
  return 10.0 * std::log10(sig / err);
}

}  // namespace stylus
