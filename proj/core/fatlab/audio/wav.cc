// fatlab/audio/wav.cc

// Copyright 2026  FATLab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fatlab/audio/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fatlab/util/check.h"

namespace fatlab {
namespace audio {

namespace {

uint32_t GetU32(const char *p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint16_t GetU16(const char *p) {
  return static_cast<uint16_t>(static_cast<unsigned char>(p[0]) |
                               (static_cast<unsigned char>(p[1]) << 8));
}

void PutU32(std::string *buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string *buf, uint16_t v) {
  buf->push_back(static_cast<char>(v & 0xff));
  buf->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform LoadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    FATLAB_ERR << "wav: cannot open: " << path;
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    FATLAB_ERR << "wav: not a RIFF/WAVE file: " << path;
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_pos = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char *hdr = bytes.data() + pos;
    uint32_t chunk_len = GetU32(hdr + 4);
    size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      FATLAB_ERR << "wav: truncated chunk '" << std::string(hdr, 4) << "' in " << path;
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) {
        FATLAB_ERR << "wav: fmt chunk too short in " << path;
      }
      format = GetU16(bytes.data() + body);
      channels = GetU16(bytes.data() + body + 2);
      rate = GetU32(bytes.data() + body + 4);
      bits = GetU16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_pos = body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);
  }
  if (!have_fmt || data_pos == 0) {
    FATLAB_ERR << "wav: missing fmt or data chunk in " << path;
  }
  if (format != 1) {
    FATLAB_ERR << "wav: only PCM supported, got format tag " << format << " in " << path;
  }
  if (channels != 1) {
    FATLAB_ERR << "wav: only mono supported, got " << channels << " channels in " << path;
  }
  if (bits != 16) {
    FATLAB_ERR << "wav: only 16-bit supported, got " << bits << " bits in " << path;
  }
  if (data_len % 2 != 0) {
    FATLAB_ERR << "wav: odd data length in " << path;
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  size_t n = data_len / 2;
  w.samples.resize(n);
  const char *d = bytes.data() + data_pos;
  for (size_t i = 0; i < n; ++i) {
    int16_t v = static_cast<int16_t>(GetU16(d + 2 * i));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

void SaveWav(const std::string &path, const Waveform &w) {
  FATLAB_CHECK(!w.samples.empty()) << "(wav: refusing to write empty waveform to " << path << ")";
  std::string buf;
  uint32_t n = static_cast<uint32_t>(w.samples.size());
  uint32_t data_len = n * 2;
  buf.reserve(44 + data_len);
  buf.append("RIFF");
  PutU32(&buf, 36 + data_len);
  buf.append("WAVE");
  buf.append("fmt ");
  PutU32(&buf, 16);
  PutU16(&buf, 1);
  PutU16(&buf, 1);
  PutU32(&buf, static_cast<uint32_t>(w.sample_rate));
  PutU32(&buf, static_cast<uint32_t>(w.sample_rate) * 2);
  PutU16(&buf, 2);
  PutU16(&buf, 16);
  buf.append("data");
  PutU32(&buf, data_len);
  for (double s : w.samples) {
    long long q = std::llround(s * 32768.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    PutU16(&buf, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    FATLAB_ERR << "wav: cannot open for write: " << path;
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    FATLAB_ERR << "wav: write failed: " << path;
  }
}

double MeanSquare(const Waveform &w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.samples.size());
}

double PeakAbs(const Waveform &w) {
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::fabs(s));
  return peak;
}

}  // namespace audio
}  // namespace fatlab
