#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "sedetect/app.hpp"
#include "sedetect/errors.hpp"

using namespace sedetect;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sedetect_app_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Fixture {
  TimeSeries audio;
  PresenceMask mask;
  AnnotationSet annotations;
};

Fixture sweep_in_noise(double snr_db, std::uint64_t seed) {
  SweepSpec spec;
  spec.duration_s = 10.0;
  const SweepSignal sig = gen_pulsed_fm_sweep(spec);
  const TimeSeries w = surrogate_noise(sig.signal.size(), spec.sample_rate_hz, seed);
  Fixture f;
  f.audio = mix_at_snr(sig.signal, w, SnrSpec{snr_db, {150.0, 1000.0}}, sig.mask).mixture;
  f.mask = sig.mask;
  f.annotations.intervals = intervals_from_flags(sig.mask.to_flags(), spec.sample_rate_hz);
  return f;
}

app::DetectorConfig raw_config() {
  app::DetectorConfig cfg;
  cfg.preprocess_enabled = false;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEDETECT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("noise alone yields no detections") {
  const TimeSeries w = surrogate_noise(20000, 2000.0, 3);
  const app::DetectionReport r = app::detect(w, raw_config());
  CHECK(r.status == app::DetectStatus::no_points_of_interest);
  CHECK(r.intervals.empty());
  CHECK(r.means.separation() < 0.3);
}

TEST_CASE("a clear sweep is found and scored") {
  const Fixture f = sweep_in_noise(10.0, 5);
  const app::DetectionReport r = app::detect(f.audio, raw_config(), f.annotations);
  REQUIRE(r.status == app::DetectStatus::ok);
  REQUIRE(r.scores.size() == f.audio.size());
  std::size_t hit = 0;
  for (std::size_t i : f.mask.indices) hit += r.scores[i] > 0.1;
  CHECK(static_cast<double>(hit) / static_cast<double>(f.mask.count()) >= 0.9);
  REQUIRE(r.hard_rates);
  REQUIRE(r.soft_rates);
  CHECK(r.hard_rates->tpr > 0.9);
  CHECK(r.soft_rates->stnr > 0.9);
  CHECK(r.gain == doctest::Approx(std::log(0.95 / 0.05)));
  CHECK(r.boundary == doctest::Approx(0.5 * (r.means.mu_s + r.means.mu_ns)));
}

TEST_CASE("detection does not depend on input scale") {
  Fixture f = sweep_in_noise(5.0, 6);
  const app::DetectionReport a = app::detect(f.audio, raw_config());
  for (double& v : f.audio.samples) v *= 10.0;
  const app::DetectionReport b = app::detect(f.audio, raw_config());
  REQUIRE(a.scores.size() == b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); i += 101) CHECK(b.scores[i] == doctest::Approx(a.scores[i]).epsilon(1e-8));
  CHECK(a.intervals.size() == b.intervals.size());
}

TEST_CASE("json report is deterministic and complete") {
  const Fixture f = sweep_in_noise(10.0, 8);
  const app::DetectionReport r = app::detect(f.audio, raw_config(), f.annotations);
  const std::string a = app::report_to_json(r, true);
  CHECK(a == app::report_to_json(app::detect(f.audio, raw_config(), f.annotations), true));
  const auto j = nlohmann::json::parse(a);
  CHECK(j.at("status") == "ok");
  CHECK(j.at("sample_count") == f.audio.size());
  CHECK(j.at("scores").size() == f.audio.size());
  CHECK(j.at("class_means").at("converged") == true);
  CHECK(j.at("intervals").size() == r.intervals.size());
  CHECK(j.contains("metrics"));
  CHECK_FALSE(nlohmann::json::parse(app::report_to_json(r, false)).contains("scores"));

  std::ostringstream csv;
  app::write_intervals_csv(csv, r.intervals);
  CHECK(csv.str().rfind("start_s,end_s\n", 0) == 0);
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  const Fixture f = sweep_in_noise(10.0, 9);
  write_wav(dir.path / "mix.wav", f.audio, WavEncoding::float32);
  const std::string wav = (dir.path / "mix.wav").string();

  CHECK(run_cli("detect " + wav + " --no-preprocess --annotations " + (dir.path / "none.csv").string() + " --out " +
                (dir.path / "r.json").string()) == app::kIoError);
  CHECK_FALSE(fs::exists(dir.path / "r.json"));

  TimeSeries silent;
  silent.sample_rate_hz = 2000.0;
  silent.samples.assign(4000, 0.0);
  write_wav(dir.path / "silent.wav", silent);
  CHECK(run_cli("detect " + (dir.path / "silent.wav").string() + " --no-preprocess --out " +
                (dir.path / "s.json").string()) == app::kDegenerateClusters);
  CHECK(nlohmann::json::parse(slurp(dir.path / "s.json")).at("status") == "degenerate clusters");

  CHECK(run_cli("detect " + wav + " --band 500:400") == app::kInvalidInput);
  CHECK(run_cli("detect " + wav + " --no-such-flag") == app::kUsage);
  CHECK(run_cli("detect " + wav + " --no-preprocess --out " + (dir.path / "ok.json").string()) == app::kOk);
  CHECK(fs::exists(dir.path / "ok.intervals.csv"));
}

TEST_CASE("cli config file with flag override") {
  TempDir dir;
  const Fixture f = sweep_in_noise(10.0, 10);
  write_wav(dir.path / "mix.wav", f.audio, WavEncoding::float32);
  const std::string wav = (dir.path / "mix.wav").string();
  {
    std::ofstream cfg(dir.path / "run.conf");
    cfg << "method=stft\nmf=301\np=0.9\n";
  }
  const std::string base = "--config " + (dir.path / "run.conf").string() + " detect " + wav + " --no-preprocess";
  REQUIRE(run_cli(base + " --out " + (dir.path / "a.json").string()) == 0);
  REQUIRE(run_cli(base + " --mf 101 --out " + (dir.path / "b.json").string()) == 0);
  const auto a = nlohmann::json::parse(slurp(dir.path / "a.json"));
  const auto b = nlohmann::json::parse(slurp(dir.path / "b.json"));
  CHECK(a.at("config").at("method") == "stft");
  CHECK(a.at("config").at("mf") == 301);
  CHECK(a.at("config").at("p") == 0.9);
  CHECK(b.at("config").at("mf") == 101);
  CHECK(b.at("config").at("method") == "stft");
}

TEST_CASE("roc output is reproducible") {
  TempDir dir;
  const Fixture f = sweep_in_noise(0.0, 11);
  write_wav(dir.path / "mix.wav", f.audio, WavEncoding::float32);
  {
    std::ofstream ann(dir.path / "ann.csv");
    ann << "start_s,end_s\n";
    for (const Interval& iv : f.annotations.intervals) ann << iv.start_s << "," << iv.end_s << "\n";
  }
  const std::string args = "roc " + (dir.path / "mix.wav").string() + " " + (dir.path / "ann.csv").string() +
                           " --no-preprocess --thresholds 50 --out ";
  REQUIRE(run_cli(args + (dir.path / "r1").string()) == 0);
  REQUIRE(run_cli(args + (dir.path / "r2").string()) == 0);
  for (const char* name : {"roc_baseline.csv", "roc_proposed.csv", "roc_bled.csv"}) {
    const std::string one = slurp(dir.path / "r1" / name);
    CHECK(one == slurp(dir.path / "r2" / name));
    CHECK(one.rfind("threshold,tpr,fpr\n", 0) == 0);
    CHECK(std::count(one.begin(), one.end(), '\n') == 51);
  }
}

TEST_CASE("roc curves from the library are monotone") {
  const Fixture f = sweep_in_noise(0.0, 12);
  const app::RocRun run = app::roc(f.audio, f.annotations, raw_config(), 60);
  for (const RocCurve* c : {&run.baseline, &run.proposed, &run.bled}) {
    REQUIRE(c->points.size() == 60);
    for (std::size_t i = 1; i < c->points.size(); ++i) CHECK(c->points[i].threshold > c->points[i - 1].threshold);
  }
  CHECK(tpr_at_fpr(run.proposed, 0.05) > 0.5);
}
