#include "emosid/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emosid/errors.hpp"

namespace emosid {

namespace {

std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char> &out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_u16(std::vector<unsigned char> &out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw ParseError(path.string() + " is not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char *id = reinterpret_cast<const char *>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw ParseError("truncated chunk in " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw ParseError("fmt chunk too small");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_offset = body;
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data_offset == 0)
    throw ParseError(path.string() + " is missing fmt or data chunk");

  if (format != 1) throw UnsupportedFormat("only PCM encoding is supported");
  if (channels != 1)
    throw UnsupportedFormat("only mono is supported, got " + std::to_string(channels) +
                            " channels");
  if (bits != 16) throw UnsupportedFormat("only 16-bit samples are supported");
  if (rate != static_cast<std::uint32_t>(kSampleRateHz))
    throw UnsupportedFormat("only 16 kHz is supported, got " + std::to_string(rate) + " Hz");

  AudioBuffer audio;
  audio.sample_rate_hz = kSampleRateHz;
  const std::size_t n_samples = data_size / 2;
  audio.samples.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(bytes.data() + data_offset + 2 * i));
    audio.samples[i] = static_cast<double>(raw) / 32768.0;
  }
  return audio;
}

void write_wav(const AudioBuffer &audio, const std::filesystem::path &path) {
  const std::uint32_t data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (double s : audio.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char *>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing " + path.string());
}

}  // namespace emosid
