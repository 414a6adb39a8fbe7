#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sedetect/app.hpp"
#include "sedetect/errors.hpp"

namespace fs = std::filesystem;
using namespace sedetect;

namespace {

struct Options {
  std::optional<std::string> method;
  std::optional<std::string> band;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<int> vpo;
  std::optional<std::size_t> window;
  std::optional<std::size_t> overlap;
  std::optional<std::size_t> fft_size;
  std::optional<std::size_t> mf;
  std::optional<double> p;
  std::optional<double> threshold;
  std::optional<double> min_separation;
  std::uint64_t seed{7};
  std::optional<std::string> noise_file;
  std::optional<std::string> out;
  bool no_preprocess{false};

  // simulate
  std::vector<std::string> methods;
  std::vector<double> snrs;
  std::vector<std::size_t> mf_list;
  std::optional<int> pulses;

  // detect / roc / entropy
  std::string audio;
  std::string annotations;
  std::optional<std::string> intervals_out;
  bool no_scores{false};
  std::size_t thresholds{200};
};

FrequencyBand parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("--band expects LOW:HIGH, got '" + text + "'");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const std::string lo = text.substr(0, colon);
    const std::string hi = text.substr(colon + 1);
    FrequencyBand b{std::stod(lo, &used_lo), std::stod(hi, &used_hi)};
    if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument("trailing");
    return b;
  } catch (const std::logic_error&) {
    throw InvalidInput("--band expects LOW:HIGH, got '" + text + "'");
  }
}

void apply_window(const Options& o, WindowSpec& w) {
  if (o.window) {
    w.length_samples = *o.window;
    if (!o.overlap) w.overlap_samples = *o.window - 1;
    if (!o.fft_size) w.fft_size = *o.window;
  }
  if (o.overlap) w.overlap_samples = *o.overlap;
  if (o.fft_size) w.fft_size = *o.fft_size;
}

void apply_entropy(const Options& o, EntropyConfig& e) {
  if (o.method) e.method = parse_spectrogram_kind(*o.method);
  if (o.band) e.band = parse_band(*o.band);
  if (o.gamma) e.gamma = *o.gamma;
  if (o.beta) e.beta = *o.beta;
  if (o.vpo) e.voices_per_octave = *o.vpo;
  apply_window(o, e.window);
}

app::DetectorConfig detector_config(const Options& o) {
  app::DetectorConfig cfg;
  apply_entropy(o, cfg.entropy);
  if (o.mf) cfg.median_window = *o.mf;
  if (o.p) cfg.p = *o.p;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.min_separation) cfg.min_separation = *o.min_separation;
  cfg.preprocess_enabled = !o.no_preprocess;
  return cfg;
}

TimeSeries load_audio(const std::string& path) { return load_wav(path); }

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(*path, std::ios::binary);
  if (!os) throw IoError("cannot create " + *path);
  os << text;
  if (!os) throw IoError("write failed for " + *path);
}

int run_detect(const Options& o) {
  const app::DetectorConfig cfg = detector_config(o);
  std::optional<AnnotationSet> ann;
  if (!o.annotations.empty()) ann = parse_annotations(o.annotations);
  app::DetectionReport report = app::detect(load_audio(o.audio), cfg, ann);
  report.source = o.audio;

  write_text(o.out, app::report_to_json(report, !o.no_scores));
  std::optional<std::string> iv_path = o.intervals_out;
  if (!iv_path && o.out && *o.out != "-") iv_path = fs::path(*o.out).replace_extension(".intervals.csv").string();
  if (iv_path) {
    std::ostringstream ss;
    app::write_intervals_csv(ss, report.intervals);
    write_text(iv_path, ss.str());
  }
  if (report.status == app::DetectStatus::degenerate_clusters) {
    std::cerr << "sedetect: class means are not separated; no detections\n";
    return app::kDegenerateClusters;
  }
  if (report.status == app::DetectStatus::no_points_of_interest) {
    std::cerr << "sedetect: no points of interest (separation " << report.means.separation() << ")\n";
  }
  return app::kOk;
}

int run_simulate(const Options& o) {
  app::SimulateConfig cfg;
  cfg.seed = o.seed;
  if (o.noise_file) cfg.noise_file = *o.noise_file;
  if (o.pulses) cfg.sweep.pulse_count = *o.pulses;
  apply_entropy(o, cfg.grid.entropy);
  if (o.band) cfg.grid.snr_band = cfg.grid.entropy.band;
  if (o.p) cfg.grid.p = *o.p;
  if (!o.methods.empty()) {
    cfg.grid.methods.clear();
    for (const std::string& m : o.methods) cfg.grid.methods.push_back(parse_spectrogram_kind(m));
  }
  if (!o.snrs.empty()) cfg.grid.snrs_db = o.snrs;
  if (!o.mf_list.empty()) cfg.grid.window_lengths = o.mf_list;
  if (o.mf) cfg.grid.window_lengths = {*o.mf};

  const GridResult result = app::simulate(cfg);
  std::ostringstream ss;
  write_grid_csv(ss, result);
  write_text(o.out, ss.str());
  return app::kOk;
}

int run_roc(const Options& o) {
  const app::DetectorConfig cfg = detector_config(o);
  const AnnotationSet ann = parse_annotations(o.annotations);
  const app::RocRun run = app::roc(load_audio(o.audio), ann, cfg, o.thresholds);

  const fs::path dir = o.out ? fs::path(*o.out) : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::pair<const char*, const RocCurve*> curves[] = {
      {"roc_baseline.csv", &run.baseline}, {"roc_proposed.csv", &run.proposed}, {"roc_bled.csv", &run.bled}};
  for (const auto& [name, curve] : curves) {
    std::ostringstream ss;
    write_roc_csv(ss, *curve);
    write_text((dir / name).string(), ss.str());
  }
  return app::kOk;
}

int run_entropy(const Options& o) {
  const app::DetectorConfig cfg = detector_config(o);
  TimeSeries x = load_audio(o.audio);
  if (cfg.preprocess_enabled) x = preprocess(x, cfg.preprocess).series;
  const EntropySeries h = entropy_from_audio(x, cfg.entropy);
  const std::vector<double> f = median_filter(h.values, MedianFilterSpec{cfg.median_window});
  std::ostringstream ss;
  ss << "time_s,entropy,filtered\n";
  char line[96];
  for (std::size_t n = 0; n < h.values.size(); ++n) {
    std::snprintf(line, sizeof line, "%.6f,%.9f,%.9f\n", static_cast<double>(n) / x.sample_rate_hz, h.values[n], f[n]);
    ss << line;
  }
  write_text(o.out, ss.str());
  return app::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Soft-output narrow-band signal detection by band-limited spectral entropy"};
  cli.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  cli.require_subcommand(1);
  Options o;

  cli.add_option("--method", o.method, "Time-frequency method")->check(CLI::IsMember({"stft", "cwt_l1", "cwt_l2"}));
  cli.add_option("--band", o.band, "Entropy band LOW:HIGH in Hz");
  cli.add_option("--gamma", o.gamma, "Morse gamma");
  cli.add_option("--beta", o.beta, "Morse beta");
  cli.add_option("--vpo", o.vpo, "CWT voices per octave");
  cli.add_option("--window", o.window, "STFT window length N");
  cli.add_option("--overlap", o.overlap, "STFT overlap in samples (default N-1)");
  cli.add_option("--fft-size", o.fft_size, "STFT FFT size (default N)");
  cli.add_option("--mf", o.mf, "Median filter window M (odd)");
  cli.add_option("--p", o.p, "Sigmoid target probability in (0.5, 1)");
  cli.add_option("--threshold", o.threshold, "Detection threshold on c_s");
  cli.add_option("--min-separation", o.min_separation, "Smallest class separation treated as a detection");
  cli.add_option("--seed", o.seed, "Noise seed");
  cli.add_option("--noise-file", o.noise_file, "WAV noise recording for simulate")->check(CLI::ExistingFile);
  cli.add_option("--out", o.out, "Output file (detect, simulate, entropy) or directory (roc)");
  cli.add_flag("--no-preprocess", o.no_preprocess, "Skip resampling, high-pass and normalization");

  auto* detect = cli.add_subcommand("detect", "Detect signal intervals in a recording");
  detect->add_option("audio", o.audio, "Input WAV")->required();
  detect->add_option("--annotations", o.annotations, "start_s,end_s CSV for metrics");
  detect->add_option("--intervals", o.intervals_out, "Interval CSV path");
  detect->add_flag("--no-scores", o.no_scores, "Leave per-sample scores out of the JSON report");

  auto* simulate = cli.add_subcommand("simulate", "Run the SNR x median-window x method grid");
  simulate->add_option("--methods", o.methods, "Comma-separated methods")->delimiter(',');
  simulate->add_option("--snrs", o.snrs, "Comma-separated SNRs in dB")->delimiter(',');
  simulate->add_option("--mf-list", o.mf_list, "Comma-separated median windows")->delimiter(',');
  simulate->add_option("--pulses", o.pulses, "Number of sweep pulses");

  auto* roc = cli.add_subcommand("roc", "ROC curves for baseline entropy, proposed detector and BLED");
  roc->add_option("audio", o.audio, "Input WAV")->required();
  roc->add_option("annotations", o.annotations, "start_s,end_s CSV")->required();
  roc->add_option("--thresholds", o.thresholds, "Thresholds per curve")->check(CLI::Range(2, 100000));

  auto* entropy = cli.add_subcommand("entropy", "Dump per-sample spectral entropy");
  entropy->add_option("audio", o.audio, "Input WAV")->required();

  for (CLI::App* sub : {detect, simulate, roc, entropy}) sub->fallthrough();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kOk : app::kUsage;
  }

  try {
    if (detect->parsed()) return run_detect(o);
    if (simulate->parsed()) return run_simulate(o);
    if (roc->parsed()) return run_roc(o);
    return run_entropy(o);
  } catch (const IoError& e) {
    std::cerr << "sedetect: " << e.what() << '\n';
    return app::kIoError;
  } catch (const DegenerateClusters& e) {
    std::cerr << "sedetect: " << e.what() << '\n';
    return app::kDegenerateClusters;
  } catch (const std::exception& e) {
    std::cerr << "sedetect: " << e.what() << '\n';
    return app::kInvalidInput;
  }
}
