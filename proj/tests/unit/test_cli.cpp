#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HOMSIM_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("homsim_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
};

bool has_partial_files(const fs::path& dir) {
  if (!fs::exists(dir)) return false;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".partial") return true;
  return false;
}

}  // namespace

TEST_CASE("dip scenario with the shipped defaults") {
  Scratch s("dip");
  const std::string cfg = HOMSIM_SOURCE_DIR "/configs/defaults.conf";
  REQUIRE(run_cli("dip --config " + cfg + " --out " + s.dir.string()) == 0);
  const auto meta = nlohmann::json::parse(slurp(s.dir / "dip.meta.json"));
  CHECK(meta["results"]["visibility"].get<double>() == doctest::Approx(0.820).epsilon(0.012));
  CHECK(meta["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(meta["output"]["columns"]["probability"] == 2);
  CHECK(meta.contains("wall_time_s"));
  CHECK(slurp(s.dir / "dip.csv").rfind("tau_ps,probability\n", 0) == 0);
}

TEST_CASE("multipair scenario with the shipped defaults") {
  Scratch s("multipair");
  const std::string cfg = HOMSIM_SOURCE_DIR "/configs/defaults.conf";
  REQUIRE(run_cli("multipair --config " + cfg + " --out " + s.dir.string()) == 0);
  const auto meta = nlohmann::json::parse(slurp(s.dir / "multipair.meta.json"));
  CHECK(meta["results"]["V"].get<double>() == doctest::Approx(0.681).epsilon(0.03));
}

TEST_CASE("identical config and seed give identical bytes") {
  Scratch s("determinism");
  const auto cfg = s.write("c.conf",
                           "grid.points = 64\ndip.delay_min_ps = -6\ndip.delay_max_ps = 6\nsample.n_pairs = 20000\nsample.tau_ps = 3\n"
                           "reconstruct.bin_width_nm = 0.3\n");
  for (const char* run : {"a", "b"}) {
    const fs::path out = s.dir / run;
    REQUIRE(run_cli("sample --config " + cfg.string() + " --seed 7 --threads 3 --out " + out.string()) == 0);
    const auto events = (out / "events.csv").string();
    const auto rc = s.write(std::string("r_") + run + ".conf",
                            "reconstruct.events_file = " + events + "\nreconstruct.bin_width_nm = 0.3\n");
    REQUIRE(run_cli("reconstruct --config " + rc.string() + " --out " + out.string()) == 0);
    REQUIRE(run_cli("dip --config " + cfg.string() + " --threads 1 --out " + out.string()) == 0);
  }
  for (const char* f : {"events.csv", "histogram.csv", "dip.csv"})
    CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "b" / f));

  const fs::path other = s.dir / "c";
  REQUIRE(run_cli("sample --config " + cfg.string() + " --seed 8 --out " + other.string()) == 0);
  CHECK(slurp(other / "events.csv") != slurp(s.dir / "a" / "events.csv"));
}

TEST_CASE("exit codes") {
  Scratch s("exit");
  const auto good = s.write("good.conf", "grid.points = 32\ndip.delay_min_ps = -3\ndip.delay_max_ps = 3\n");
  const auto bad = s.write("bad.conf", "multipair.mean_photon_number = -1\n");

  CHECK(run_cli("multipair --config " + bad.string() + " --out " + s.dir.string()) == 2);
  CHECK(run_cli("warp --config " + good.string()) == 2);
  CHECK(run_cli("dip") == 2);
  CHECK(run_cli("dip --config " + good.string() + " --bogus-flag") == 2);
  CHECK(run_cli("dip --config " + (s.dir / "missing.conf").string()) == 4);

  // Output directory path blocked by a regular file.
  const auto blocker = s.write("blocker", "x");
  CHECK(run_cli("dip --config " + good.string() + " --out " + (blocker / "sub").string()) == 4);

  const auto events = s.write("events.csv", "channel,arrival_time_ps\nout1,1\n");
  const auto rc = s.write("r.conf", "reconstruct.events_file = " + events.string() + "\n");
  CHECK(run_cli("reconstruct --config " + rc.string() + " --out " + (s.dir / "r").string()) == 2);
  CHECK_FALSE(fs::exists(s.dir / "r" / "histogram.csv"));

  const auto missing = s.write("m.conf", "reconstruct.events_file = " + (s.dir / "nope.csv").string() + "\n");
  CHECK(run_cli("reconstruct --config " + missing.string() + " --out " + (s.dir / "m").string()) == 4);

  CHECK(run_cli("dip --config " + good.string() + " --out " + (s.dir / "ok").string()) == 0);
  CHECK_FALSE(has_partial_files(s.dir));
}

TEST_CASE("thread count from the environment") {
  Scratch s("threads");
  const auto good = s.write("good.conf", "grid.points = 32\ndip.delay_min_ps = -3\ndip.delay_max_ps = 3\n");
  CHECK(run_cli("dip --config " + good.string() + " --out " + s.dir.string()) == 0);
  const std::string env_bad = "HOMSIM_THREADS=lots ";
  const std::string cmd = env_bad + "\"" + HOMSIM_CLI + "\" dip --config " + good.string() +
                          " --out " + s.dir.string() + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
