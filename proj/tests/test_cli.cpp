// End-to-end checks of the dnpsim binary: exit codes, output schemas,
// determinism of serialized results, and independence from the worker count.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void dump(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DNPSIM_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const fs::path kWork = fs::temp_directory_path() / "dnpsim_cli_test";

const char* kSimConfig = R"({
  "name": "smoke",
  "system": {"electron": "spin_half", "larmor_MHz": 1.0,
             "nuclei": [{"a_perp_MHz": 0.3}, {"a_perp_MHz": 0.3}]},
  "sequence": {"protocol": "pulsepol", "resonant": "precession", "n_pol": 1},
  "run": {"modes": ["coherent", "incoherent"], "n_rep": 50, "seed": 5}
})";

const char* kSweepConfig = R"({
  "name": "sweep_smoke",
  "system": {"electron": "nv_effective", "field_mT": 40.0, "species": "c13",
             "cluster": {"n_nuc": 3, "count": 4}},
  "sequence": {"protocol": "pulsepol", "resonant": "larmor", "n_pol": 1},
  "run": {"n_rep": 40, "seed": 11},
  "sweep": {"modes": ["coherent", "incoherent"]}
})";

}  // namespace

TEST_CASE("simulate writes trajectories, summary, and declared headers") {
  fs::remove_all(kWork);
  dump(kWork / "sim.json", kSimConfig);
  const int rc = run_cli("simulate --config " + (kWork / "sim.json").string() + " --out " +
                         (kWork / "o1").string());
  REQUIRE(rc == 0);

  const std::string traj = slurp(kWork / "o1/smoke/trajectory_coherent.csv");
  CHECK(traj.rfind("rep,spin1,spin2,total_P,config_hash", 0) == 0);
  // header + initial row + 50 repetitions
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 52);

  const std::string summary = slurp(kWork / "o1/smoke/summary.csv");
  CHECK(summary.find("incoherent") != std::string::npos);
  CHECK(summary.find("coherent") != std::string::npos);

  // every data row carries the config hash
  std::istringstream lines(traj);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.find_last_of(',') != std::string::npos);
    const std::string hash = line.substr(line.find_last_of(',') + 1);
    CHECK(hash.size() == 16);
    ++rows;
  }
  CHECK(rows == 51);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  dump(kWork / "sim.json", kSimConfig);
  REQUIRE(run_cli("simulate --config " + (kWork / "sim.json").string() + " --out " +
                  (kWork / "r1").string()) == 0);
  REQUIRE(run_cli("simulate --config " + (kWork / "sim.json").string() + " --out " +
                  (kWork / "r2").string()) == 0);
  for (const char* rel : {"smoke/trajectory_coherent.csv", "smoke/trajectory_incoherent.csv",
                          "smoke/summary.csv"}) {
    CHECK(slurp(kWork / "r1" / rel) == slurp(kWork / "r2" / rel));
  }
  // JSON results are identical apart from the wall-clock timing field
  auto strip_timing = [](std::string text) {
    const auto pos = text.find("\"wall_seconds\"");
    if (pos != std::string::npos) {
      const auto end = text.find('\n', pos);
      text.erase(pos, end - pos);
    }
    return text;
  };
  CHECK(strip_timing(slurp(kWork / "r1/smoke/result_coherent.json")) ==
        strip_timing(slurp(kWork / "r2/smoke/result_coherent.json")));
}

TEST_CASE("amplitudes emits the declared spectrum schema") {
  dump(kWork / "amp.json", R"({
    "name": "amp_smoke",
    "system": {"electron": "spin_half", "larmor_MHz": 1.0,
               "nuclei": [{"a_perp_MHz": 0.3}, {"a_perp_MHz": 0.3}]},
    "sequence": {"protocol": "pulsepol", "resonant": "precession", "n_pol": 1},
    "amplitudes": {"scan": "tau_pol", "start": 1.2, "stop": 1.8, "points": 7}
  })");
  REQUIRE(run_cli("amplitudes --config " + (kWork / "amp.json").string() + " --out " +
                  (kWork / "amp_out").string()) == 0);
  const std::string csv = slurp(kWork / "amp_out/amp_smoke/spectrum.csv");
  CHECK(csv.rfind("scan_value,alpha_minus_abs,alpha_plus_abs,alpha_plus_z_abs,"
                  "alpha_minus_z_abs,beta_pm_abs,beta_pp_abs,beta_e_abs,beta_z_abs,"
                  "beta_zz_abs,config_hash",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
}

TEST_CASE("cluster-gen archive is reproducible and n_configs = 0 succeeds") {
  dump(kWork / "gen.json", R"({
    "name": "gen_smoke",
    "system": {"electron": "nv_effective", "field_mT": 40.0, "species": "c13",
               "cluster": {"n_nuc": 4, "count": 3}},
    "sequence": {"protocol": "pulsepol", "resonant": "larmor", "n_pol": 1},
    "run": {"seed": 99}
  })");
  REQUIRE(run_cli("cluster-gen --config " + (kWork / "gen.json").string() + " --out " +
                  (kWork / "g1").string()) == 0);
  REQUIRE(run_cli("cluster-gen --config " + (kWork / "gen.json").string() + " --out " +
                  (kWork / "g2").string()) == 0);
  for (const char* rel :
       {"gen_smoke/config_0000.json", "gen_smoke/config_0002.json", "gen_smoke/summary.csv"})
    CHECK(slurp(kWork / "g1" / rel) == slurp(kWork / "g2" / rel));

  dump(kWork / "gen0.json", R"({
    "name": "gen_zero",
    "system": {"electron": "nv_effective", "field_mT": 40.0, "species": "c13",
               "cluster": {"n_nuc": 4, "count": 0}},
    "sequence": {"protocol": "pulsepol", "resonant": "larmor", "n_pol": 1}
  })");
  CHECK(run_cli("cluster-gen --config " + (kWork / "gen0.json").string() + " --out " +
                (kWork / "g0").string()) == 0);
  CHECK(slurp(kWork / "g0/gen_zero/summary.csv").rfind("index,seed", 0) == 0);
}

TEST_CASE("sweep output is independent of the worker count and resumable") {
  dump(kWork / "sweep.json", kSweepConfig);
  REQUIRE(run_cli("sweep --config " + (kWork / "sweep.json").string() + " --jobs 1 --out " +
                  (kWork / "s1").string()) == 0);
  REQUIRE(run_cli("sweep --config " + (kWork / "sweep.json").string() + " --jobs 2 --out " +
                  (kWork / "s2").string()) == 0);
  CHECK(slurp(kWork / "s1/sweep_smoke/results.csv") == slurp(kWork / "s2/sweep_smoke/results.csv"));
  CHECK(slurp(kWork / "s1/sweep_smoke/stats.csv") == slurp(kWork / "s2/sweep_smoke/stats.csv"));

  // rerunning in place resumes every completed point and rewrites aggregates
  const std::string before = slurp(kWork / "s1/sweep_smoke/results.csv");
  REQUIRE(run_cli("sweep --config " + (kWork / "sweep.json").string() + " --jobs 2 --out " +
                  (kWork / "s1").string()) == 0);
  CHECK(slurp(kWork / "s1/sweep_smoke/results.csv") == before);

  const std::string stats = slurp(kWork / "s1/sweep_smoke/stats.csv");
  CHECK(stats.rfind("b0_mT,mode,count,min,q1,median,q3,max,hist_peak_0p02,config_hash", 0) == 0);
}

TEST_CASE("exit codes") {
  CHECK(run_cli("simulate") == 2);   // neither --config nor --preset
  dump(kWork / "bad.json", "{ this is not json");
  CHECK(run_cli("simulate --config " + (kWork / "bad.json").string()) == 2);
  dump(kWork / "badfield.json", R"({
    "system": {"larmor_MHz": 1.0, "nuclei": []},
    "sequence": {"tau_pol_us": 1.0}
  })");
  CHECK(run_cli("simulate --config " + (kWork / "badfield.json").string()) == 2);
  CHECK(run_cli("simulate --config /nonexistent/nope.json") == 2);
  // resource guard: N_nuc > 12
  std::string big = R"({"system": {"larmor_MHz": 1.0, "nuclei": [)";
  for (int i = 0; i < 13; ++i) big += std::string(i ? "," : "") + R"({"a_perp_MHz": 0.01})";
  big += R"(]}, "sequence": {"tau_pol_us": 1.0}})";
  dump(kWork / "big.json", big);
  CHECK(run_cli("simulate --config " + (kWork / "big.json").string()) != 0);
}

TEST_CASE("seed override changes stochastic outputs") {
  dump(kWork / "gen.json", R"({
    "name": "gen_seed",
    "system": {"electron": "nv_effective", "field_mT": 40.0, "species": "c13",
               "cluster": {"n_nuc": 4, "count": 2}},
    "sequence": {"protocol": "pulsepol", "resonant": "larmor", "n_pol": 1},
    "run": {"seed": 1}
  })");
  REQUIRE(run_cli("cluster-gen --config " + (kWork / "gen.json").string() + " --out " +
                  (kWork / "seed_a").string()) == 0);
  REQUIRE(run_cli("cluster-gen --config " + (kWork / "gen.json").string() +
                  " --seed 2 --out " + (kWork / "seed_b").string()) == 0);
  CHECK(slurp(kWork / "seed_a/gen_seed/config_0000.json") !=
        slurp(kWork / "seed_b/gen_seed/config_0000.json"));
}
