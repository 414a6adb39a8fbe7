#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "sedetect/app.hpp"
#include "sedetect/errors.hpp"

namespace py = pybind11;
using namespace sedetect;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw InvalidInput("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

template <typename T>
py::array_t<double> to_array(const std::vector<T>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  auto m = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<py::ssize_t>(i)) = static_cast<double>(v[i]);
  return out;
}

TimeSeries series(const Array& x, double fs) {
  TimeSeries t;
  t.samples = to_vector(x);
  t.sample_rate_hz = fs;
  return t;
}

EntropyConfig entropy_config(const std::string& method, std::pair<double, double> band, double gamma, double beta,
                             int vpo, std::size_t window, std::optional<std::size_t> overlap) {
  EntropyConfig cfg;
  cfg.method = parse_spectrogram_kind(method);
  cfg.band = {band.first, band.second};
  cfg.gamma = gamma;
  cfg.beta = beta;
  cfg.voices_per_octave = vpo;
  cfg.window.length_samples = window;
  cfg.window.fft_size = window;
  cfg.window.overlap_samples = overlap.value_or(window - 1);
  return cfg;
}

PresenceMask mask_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& flags) {
  return PresenceMask::from_flags(std::span<const std::uint8_t>(flags.data(), static_cast<std::size_t>(flags.size())));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral entropy signal detector";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<DegenerateClusters>(m, "DegenerateClusters", PyExc_ArithmeticError);
  py::register_exception<UndefinedQuantity>(m, "UndefinedQuantity", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "morse_filterbank",
      [](double gamma, double beta, int vpo, double f_low, double f_high, double fs, std::size_t n) {
        const MorseFilterbank fb = design_morse_filterbank({gamma, beta, vpo, f_low, f_high, fs}, n);
        py::dict d;
        d["center_freqs_hz"] = to_array(fb.center_freqs_hz);
        d["scales"] = to_array(fb.scales);
        d["peak_omega"] = fb.peak_omega;
        return d;
      },
      py::arg("gamma") = 50.0, py::arg("beta") = 40.0, py::arg("vpo") = 40, py::arg("f_low") = 150.0,
      py::arg("f_high") = 1000.0, py::arg("fs") = 2000.0, py::arg("n") = 4096);

  m.def(
      "spectral_entropy",
      [](const Array& x, double fs, const std::string& method, std::pair<double, double> band, double gamma,
         double beta, int vpo, std::size_t window, std::optional<std::size_t> overlap) {
        const EntropySeries h =
            entropy_from_audio(series(x, fs), entropy_config(method, band, gamma, beta, vpo, window, overlap));
        return py::make_tuple(to_array(h.values), h.bin_count);
      },
      "Per-sample spectral entropy and the number of bins it was taken over", py::arg("x"), py::arg("fs"),
      py::arg("method") = "cwt_l1", py::arg("band") = std::pair{150.0, 1000.0}, py::arg("gamma") = 50.0,
      py::arg("beta") = 40.0, py::arg("vpo") = 40, py::arg("window") = 256, py::arg("overlap") = py::none());

  m.def(
      "median_filter", [](const Array& x, std::size_t m) { return to_array(median_filter(to_vector(x), {m})); },
      py::arg("x"), py::arg("m"));

  m.def(
      "kmeans",
      [](const Array& h, std::optional<double> epsilon, int max_iterations) {
        const KMeansResult r = kmeans_two_class(to_vector(h), KMeansConfig{epsilon, max_iterations});
        py::dict d;
        d["mu_s"] = r.means.mu_s;
        d["mu_ns"] = r.means.mu_ns;
        d["converged"] = r.means.converged;
        d["iterations"] = r.means.iterations_used;
        d["assignment"] = to_array(r.assignment);
        d["objective"] = to_array(r.objective);
        return d;
      },
      py::arg("h"), py::arg("epsilon") = py::none(), py::arg("max_iterations") = 100);

  m.def(
      "soft_classify",
      [](const Array& h, double mu_s, double mu_ns, double p) {
        const ClassMeans means{mu_s, mu_ns, true, 0};
        return to_array(soft_classify(to_vector(h), means, sigmoid_gain(p, means)));
      },
      py::arg("h"), py::arg("mu_s"), py::arg("mu_ns"), py::arg("p") = 0.99);

  m.def(
      "pulsed_sweep",
      [](double f_start, double f_end, double duration, double duty, int pulses, double fs) {
        const SweepSignal s = gen_pulsed_fm_sweep({f_start, f_end, duration, duty, pulses, fs});
        return py::make_tuple(to_array(s.signal.samples), to_array(s.mask.to_flags()));
      },
      py::arg("f_start") = 150.0, py::arg("f_end") = 800.0, py::arg("duration") = 25.0, py::arg("duty") = 0.1,
      py::arg("pulses") = 1, py::arg("fs") = 2000.0);

  m.def(
      "surrogate_noise",
      [](std::size_t n, double fs, std::uint64_t seed) { return to_array(surrogate_noise(n, fs, seed).samples); },
      py::arg("n"), py::arg("fs") = 2000.0, py::arg("seed") = 7);

  m.def(
      "band_limited_snr",
      [](const Array& x, const Array& w, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
         double fs, std::pair<double, double> band) {
        return band_limited_snr(series(x, fs), series(w, fs), {band.first, band.second}, mask_from_array(mask));
      },
      py::arg("x"), py::arg("w"), py::arg("mask"), py::arg("fs") = 2000.0, py::arg("band") = std::pair{150.0, 1000.0});

  m.def(
      "mix_at_snr",
      [](const Array& x, const Array& w, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
         double snr_db, double fs, std::pair<double, double> band) {
        const MixResult r =
            mix_at_snr(series(x, fs), series(w, fs), {snr_db, {band.first, band.second}}, mask_from_array(mask));
        return py::make_tuple(to_array(r.mixture.samples), r.signal_gain);
      },
      py::arg("x"), py::arg("w"), py::arg("mask"), py::arg("snr_db"), py::arg("fs") = 2000.0,
      py::arg("band") = std::pair{150.0, 1000.0});

  m.def(
      "simulate",
      [](std::uint64_t seed, std::vector<std::string> methods, std::vector<double> snrs, std::vector<std::size_t> mf) {
        app::SimulateConfig cfg;
        cfg.seed = seed;
        if (!methods.empty()) {
          cfg.grid.methods.clear();
          for (const std::string& s : methods) cfg.grid.methods.push_back(parse_spectrogram_kind(s));
        }
        if (!snrs.empty()) cfg.grid.snrs_db = snrs;
        if (!mf.empty()) cfg.grid.window_lengths = mf;
        const GridResult r = app::simulate(cfg);
        py::list rows;
        for (const GridRow& g : r.rows) {
          py::dict d;
          d["method"] = to_string(g.method);
          d["snr_db"] = g.snr_db;
          d["M"] = g.window_length;
          d["stpr"] = g.stpr;
          d["stnr"] = g.stnr;
          d["separation"] = g.separation;
          d["converged"] = g.converged;
          d["degenerate"] = g.degenerate;
          rows.append(d);
        }
        return rows;
      },
      "Run the SNR by median-window by method grid on the surrogate noise", py::arg("seed") = 7,
      py::arg("methods") = std::vector<std::string>{}, py::arg("snrs") = std::vector<double>{},
      py::arg("mf") = std::vector<std::size_t>{});

  m.def(
      "detect_json",
      [](const Array& x, double fs, const std::string& method, std::pair<double, double> band, std::size_t mf,
         double p, double threshold, bool preprocess, bool include_scores) {
        app::DetectorConfig cfg;
        cfg.entropy.method = parse_spectrogram_kind(method);
        cfg.entropy.band = {band.first, band.second};
        cfg.median_window = mf;
        cfg.p = p;
        cfg.threshold = threshold;
        cfg.preprocess_enabled = preprocess;
        const TimeSeries audio = series(x, fs);
        app::DetectionReport r;
        {
          py::gil_scoped_release release;
          r = app::detect(audio, cfg);
        }
        return app::report_to_json(r, include_scores);
      },
      py::arg("x"), py::arg("fs"), py::arg("method") = "cwt_l1", py::arg("band") = std::pair{130.0, 1000.0},
      py::arg("mf") = 501, py::arg("p") = 0.95, py::arg("threshold") = 0.1, py::arg("preprocess") = true,
      py::arg("include_scores") = true);
}
