#include "sedetect/audio_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sedetect/errors.hpp"

namespace sedetect {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

TimeSeries load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("wav: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "wav " + path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError(where + "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw IoError(where + "truncated fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw IoError(where + "truncated extensible fmt chunk");
        format = read_u16(bytes.data() + body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw IoError(where + "data chunk before fmt chunk");
      if (body + size > bytes.size()) throw IoError(where + "truncated data chunk");
      if (channels == 0 || rate == 0) throw IoError(where + "invalid channel count or sample rate");
      const bool pcm_ok = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
      const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
      if (!pcm_ok && !float_ok) {
        throw IoError(where + "unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                      " bits)");
      }
      const std::size_t width = bits / 8;
      const std::size_t frame = width * channels;
      const std::size_t frames = size / frame;
      TimeSeries ts;
      ts.sample_rate_hz = rate;
      ts.samples.resize(frames);
      const std::uint8_t* data = bytes.data() + body;
      const double int_scale = 1.0 / std::ldexp(1.0, bits - 1);
      for (std::size_t i = 0; i < frames; ++i) {
        const std::uint8_t* s = data + i * frame;
        double v = 0.0;
        if (format == kFormatFloat) {
          if (bits == 32) {
            v = std::bit_cast<float>(read_u32(s));
          } else {
            const std::uint64_t lo = read_u32(s);
            const std::uint64_t hi = read_u32(s + 4);
            v = std::bit_cast<double>(lo | (hi << 32));
          }
        } else if (bits == 16) {
          v = static_cast<std::int16_t>(read_u16(s)) * int_scale;
        } else if (bits == 24) {
          std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
          if (raw & 0x800000) raw -= 0x1000000;
          v = raw * int_scale;
        } else {
          v = static_cast<std::int32_t>(read_u32(s)) * int_scale;
        }
        ts.samples[i] = v;
      }
      for (double v : ts.samples) {
        if (!std::isfinite(v)) throw IoError(where + "non-finite sample");
      }
      return ts;
    }
    pos = body + size + (size & 1U);
  }
  throw IoError(where + (have_fmt ? "missing data chunk" : "missing fmt chunk"));
}

void write_wav(const std::filesystem::path& path, const TimeSeries& x, WavEncoding enc) {
  x.validate();
  const std::uint16_t bits = enc == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t format = enc == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
  const auto rate = static_cast<std::uint32_t>(std::lround(x.sample_rate_hz));
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * (bits / 8));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
  for (double v : x.samples) {
    if (enc == WavEncoding::pcm16) {
      const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("wav: cannot create " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("wav: write failed for " + path.string());
}

void PreprocessSpec::validate(double source_rate_hz) const {
  if (!(target_rate_hz > 0.0)) throw InvalidInput("preprocess: target rate must be positive");
  if (target_rate_hz > source_rate_hz) throw InvalidInput("preprocess: target rate above source rate");
  if (highpass_hz < 0.0 || !(highpass_hz < target_rate_hz / 2.0)) {
    throw InvalidInput("preprocess: high-pass cutoff must be below half the target rate");
  }
}

TimeSeries resample(const TimeSeries& x, double target_rate_hz) {
  x.validate();
  const auto in_rate = std::llround(x.sample_rate_hz);
  const auto out_rate = std::llround(target_rate_hz);
  if (std::abs(x.sample_rate_hz - static_cast<double>(in_rate)) > 1e-9 ||
      std::abs(target_rate_hz - static_cast<double>(out_rate)) > 1e-9 || out_rate <= 0) {
    throw InvalidInput("resample: rates must be whole numbers of Hz");
  }
  if (in_rate == out_rate) return x;

  const long long g = std::gcd(in_rate, out_rate);
  const long long up = out_rate / g;
  const long long down = in_rate / g;
  const long long ratio = std::max(up, down);

  // Kaiser-windowed sinc at the upsampled rate, cut off at 0.95 of the
  // lower Nyquist frequency.
  constexpr long long kZeroCrossings = 24;
  constexpr double kKaiserBeta = 9.0;
  constexpr double kRolloff = 0.95;
  const long long half = kZeroCrossings * ratio;
  const long long taps = 2 * half + 1;
  const double fc = 0.5 * kRolloff / static_cast<double>(ratio);
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  double sum = 0.0;
  for (long long k = 0; k < taps; ++k) {
    const double t = static_cast<double>(k - half);
    const double arg = 2.0 * fc * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = t / static_cast<double>(half);
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[static_cast<std::size_t>(k)] = 2.0 * fc * sinc * w;
    sum += h[static_cast<std::size_t>(k)];
  }
  for (double& v : h) v /= sum;

  const auto n_in = static_cast<long long>(x.size());
  const long long n_out = (n_in * up + down - 1) / down;
  TimeSeries out;
  out.sample_rate_hz = static_cast<double>(out_rate);
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (long long m = 0; m < n_out; ++m) {
    // Upsampled position of output m is m*down; input j sits at j*up.
    const long long centre = m * down + half;
    long long j_lo = (centre - (taps - 1) + up - 1) / up;
    if (centre - (taps - 1) < 0) j_lo = 0;
    const long long j_hi = std::min(n_in - 1, centre / up);
    double acc = 0.0;
    for (long long j = std::max(0LL, j_lo); j <= j_hi; ++j) {
      acc += x.samples[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(centre - j * up)];
    }
    out.samples[static_cast<std::size_t>(m)] = acc * static_cast<double>(up);
  }
  return out;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : x) {
      const double y = b0 * v + z1;
      z1 = b1 * v - a1 * y + z2;
      z2 = b2 * v - a2 * y;
      v = y;
    }
  }
};

// Fourth-order Butterworth high-pass as two bilinear-transformed sections.
std::array<Biquad, 2> butterworth_highpass(double fs, double fc) {
  const std::array<double, 2> qs{1.0 / (2.0 * std::cos(std::numbers::pi / 8.0)),
                                 1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0))};
  const double w0 = 2.0 * std::numbers::pi * fc / fs;
  const double cw = std::cos(w0);
  std::array<Biquad, 2> out{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double alpha = std::sin(w0) / (2.0 * qs[i]);
    const double a0 = 1.0 + alpha;
    out[i] = Biquad{(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0, (1.0 - alpha) / a0};
  }
  return out;
}

}  // namespace

std::vector<double> highpass_zero_phase(std::span<const double> x, double sample_rate_hz, double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
    throw InvalidInput("highpass: cutoff must lie in (0, fs/2)");
  }
  const std::size_t n = x.size();
  if (n < 2) return {x.begin(), x.end()};
  const auto sections = butterworth_highpass(sample_rate_hz, cutoff_hz);

  // Odd reflection at both ends so the start-up transient falls in the padding.
  const std::size_t pad = std::min(n - 1, static_cast<std::size_t>(std::ceil(10.0 * sample_rate_hz / cutoff_hz)));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  for (const Biquad& s : sections) s.run(ext);
  std::reverse(ext.begin(), ext.end());
  for (const Biquad& s : sections) s.run(ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

PreprocessResult preprocess(const TimeSeries& x, const PreprocessSpec& spec) {
  x.validate();
  spec.validate(x.sample_rate_hz);
  PreprocessResult out;
  out.series = resample(x, spec.target_rate_hz);
  if (spec.highpass_hz > 0.0) {
    out.series.samples = highpass_zero_phase(out.series.samples, out.series.sample_rate_hz, spec.highpass_hz);
  }
  if (spec.normalize_power) {
    double ms = 0.0;
    for (double v : out.series.samples) ms += v * v;
    ms = out.series.samples.empty() ? 0.0 : ms / static_cast<double>(out.series.samples.size());
    if (ms > 0.0) {
      const double g = 1.0 / std::sqrt(ms);
      for (double& v : out.series.samples) v *= g;
    } else {
      out.normalization_skipped = true;
    }
  }
  return out;
}

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
  std::vector<Interval> merged;
  for (const Interval& iv : intervals) {
    if (!merged.empty() && iv.start_s <= merged.back().end_s) {
      merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace

AnnotationSet parse_annotations_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<Interval> rows;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      std::string compact;
      std::remove_copy_if(line.begin(), line.end(), std::back_inserter(compact),
                          [](unsigned char c) { return std::isspace(c); });
      if (compact == "start_s,end_s") continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError("annotations: expected two comma-separated fields", line_no);
    }
    Interval iv;
    if (!parse_double(line.substr(0, comma), iv.start_s) || !parse_double(line.substr(comma + 1), iv.end_s)) {
      throw ParseError("annotations: malformed number", line_no);
    }
    if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) || !(iv.start_s < iv.end_s)) {
      throw ParseError("annotations: start must be before end", line_no);
    }
    rows.push_back(iv);
  }
  return AnnotationSet{merge_intervals(std::move(rows))};
}

AnnotationSet parse_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("annotations: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_annotations_text(ss.str());
}

PresenceMask mask_from_intervals(const AnnotationSet& set, double sample_rate_hz, std::size_t n_samples) {
  std::vector<std::uint8_t> flags(n_samples, 0);
  const auto to_index = [&](double t) {
    const double v = std::ceil(t * sample_rate_hz - 1e-7);
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n_samples)));
  };
  for (const Interval& iv : set.intervals) {
    const std::size_t a = to_index(iv.start_s);
    const std::size_t b = to_index(iv.end_s);
    for (std::size_t n = a; n < b; ++n) flags[n] = 1;
  }
  return PresenceMask::from_flags(flags);
}

std::vector<Interval> intervals_from_flags(std::span<const std::uint8_t> flags, double sample_rate_hz) {
  std::vector<Interval> out;
  std::size_t n = 0;
  while (n < flags.size()) {
    if (!flags[n]) {
      ++n;
      continue;
    }
    const std::size_t start = n;
    while (n < flags.size() && flags[n]) ++n;
    out.push_back({static_cast<double>(start) / sample_rate_hz, static_cast<double>(n) / sample_rate_hz});
  }
  return out;
}

}  // namespace sedetect
