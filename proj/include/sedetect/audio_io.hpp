#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sedetect/evaluation.hpp"
#include "sedetect/series.hpp"

namespace sedetect {

// Reads RIFF/WAVE with 16-bit, 24-bit or 32-bit integer PCM, or 32/64-bit
// IEEE float. Integer PCM is scaled by 1/2^(bits-1). Multichannel files
// keep the first channel.
TimeSeries load_wav(const std::filesystem::path& path);

enum class WavEncoding { pcm16, float32 };

// Writes mono. pcm16 clips to [-1, 32767/32768] and rounds to nearest.
void write_wav(const std::filesystem::path& path, const TimeSeries& x, WavEncoding enc = WavEncoding::pcm16);

struct PreprocessSpec {
  double target_rate_hz{2000.0};
  double highpass_hz{100.0};
  bool normalize_power{true};

  void validate(double source_rate_hz) const;
};

struct PreprocessResult {
  TimeSeries series;
  bool normalization_skipped{false};  // all-zero input
};

// Anti-aliased resample to the target rate, zero-phase high-pass, then
// rescale to unit mean square.
PreprocessResult preprocess(const TimeSeries& x, const PreprocessSpec& spec);

// Windowed-sinc polyphase resampler. Both rates must be integers (Hz).
TimeSeries resample(const TimeSeries& x, double target_rate_hz);

// Fourth-order Butterworth high-pass applied forward and backward.
std::vector<double> highpass_zero_phase(std::span<const double> x, double sample_rate_hz, double cutoff_hz);

struct Interval {
  double start_s{0.0};
  double end_s{0.0};
};

struct AnnotationSet {
  std::vector<Interval> intervals;  // sorted by start, non-overlapping
};

// Sorts and merges overlapping (or touching) intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals);

// CSV with header "start_s,end_s". Rows are validated (start < end, both
// finite) and merged.
AnnotationSet parse_annotations(const std::filesystem::path& path);
AnnotationSet parse_annotations_text(const std::string& text);

// Sample n is in the mask when start_s <= n/fs < end_s for some interval.
PresenceMask mask_from_intervals(const AnnotationSet& set, double sample_rate_hz, std::size_t n_samples);

// Maximal runs of nonzero flags, as [first/fs, (last+1)/fs).
std::vector<Interval> intervals_from_flags(std::span<const std::uint8_t> flags, double sample_rate_hz);

}  // namespace sedetect
