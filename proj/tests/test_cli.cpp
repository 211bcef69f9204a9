#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "latticekin/commands.hpp"
#include "latticekin/error.hpp"
#include "latticekin/snapshot.hpp"

using namespace latticekin;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const char* env = std::getenv("LATTICEKIN_TEST_TMP");
  fs::path dir = (env ? fs::path(env) : fs::temp_directory_path()) / "cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = work_dir() / name;
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the installed binary; returns its exit status.
int cli(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = fmt::format("\"{}\" {}", LATTICEKIN_CLI, args);
  cmd += stdout_file.empty() ? " > /dev/null" : fmt::format(" > \"{}\"", stdout_file.string());
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

const char* kSmallRun = R"(N = 8
scenario = symmetric
delta_f = 1e-2
w1 = 0
w2 = 0.3
t_end = 20
snapshots = 0, 5, t_end
)";

}  // namespace

TEST_CASE("csv layout") {
  CHECK(csv_header() == "t,H,E_total,N_plus,N_minus,Px,Py,beta_plus,beta_minus,D,dnA_dt");
  DiagnosticsRecord r;
  r.t = 0.1;
  r.h = 1.0 / 3.0;
  r.beta_plus = std::nan("");
  const auto fields = split(csv_row(r));
  REQUIRE(fields.size() == 11);
  CHECK(std::stod(fields[0]) == 0.1);
  CHECK(std::stod(fields[1]) == 1.0 / 3.0);  // 17 significant digits round-trip
  CHECK(fields[7] == "nan");
}

TEST_CASE("run writes diagnostics and snapshots") {
  const fs::path cfg = write_config("small.cfg", kSmallRun);
  const fs::path out = work_dir() / "small_out";
  fs::remove_all(out);
  REQUIRE(cli(fmt::format("--out-dir \"{}\" run \"{}\"", out.string(), cfg.string())) == exit_ok);

  std::ifstream csv(out / "diagnostics.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == csv_header());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(csv, line);) rows.push_back(split(line));
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[0][0]) == 0.0);
  CHECK(std::stod(rows[1][0]) == 5.0);
  CHECK(std::stod(rows[2][0]) == 20.0);
  CHECK(std::stod(rows[2][1]) >= std::stod(rows[0][1]));  // H
  CHECK(std::abs(std::stod(rows[2][3]) - std::stod(rows[0][3])) <= 1e-12);  // N+

  for (int i = 0; i < 3; ++i) {
    const DistributionState s = read_snapshot(out / fmt::format("snapshot_{:04}.lksn", i));
    CHECK(s.grid_size == 8);
    CHECK(s.time == std::stod(rows[static_cast<std::size_t>(i)][0]));
  }

  // Resuming from the last snapshot as a custom scenario.
  const fs::path resume = write_config(
      "resume.cfg", fmt::format("N = 8\nscenario = \"custom:{}\"\nt_end = 1\n",
                                (out / "snapshot_0002.lksn").string()));
  CHECK(cli(fmt::format("--out-dir \"{}\" run \"{}\"", (work_dir() / "resume_out").string(),
                        resume.string())) == exit_ok);
}

TEST_CASE("snapshot files") {
  DistributionState s(6);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = static_cast<double>(i) / 72.0;
  s.time = 12.5;
  const fs::path path = work_dir() / "s.lksn";
  write_snapshot(path, s);
  CHECK(fs::file_size(path) == 4 + 4 + 4 + 8 + 72 * 8);
  const DistributionState back = read_snapshot(path);
  CHECK(back.values == s.values);
  CHECK(back.time == 12.5);
  CHECK(back.grid_size == 6);

  std::string bytes = slurp(path);
  auto corrupt = [&](const std::string& b) {
    const fs::path bad = work_dir() / "bad.lksn";
    std::ofstream(bad, std::ios::binary) << b;
    try {
      read_snapshot(bad);
    } catch (const Error& e) {
      return e.code() == ErrorCode::corrupt_file;
    }
    return false;
  };
  CHECK(corrupt(bytes.substr(0, bytes.size() - 8)));
  CHECK(corrupt(bytes + "extra"));
  std::string out_of_range = bytes;
  out_of_range[20 + 7] = 0x40;  // first value becomes >= 2
  CHECK(corrupt(out_of_range));
  std::string bad_magic = bytes;
  bad_magic[1] = 'Z';
  CHECK(corrupt(bad_magic));
}

TEST_CASE("exit statuses") {
  CHECK(cli("") == exit_failure);
  CHECK(cli("run") == exit_failure);
  CHECK(cli(fmt::format("run \"{}\"", (work_dir() / "missing.cfg").string())) == exit_failure);
  const fs::path bad = write_config("bad.cfg", "N = 8\ncolour = blue\n");
  CHECK(cli(fmt::format("run \"{}\"", bad.string())) == exit_failure);
  // Tolerances no step can meet: the step size collapses.
  const fs::path stiff = write_config(
      "stiff.cfg", std::string(kSmallRun) + "rel_tol = 1e-300\nabs_tol = 1e-300\n");
  CHECK(cli(fmt::format("--out-dir \"{}\" run \"{}\"", (work_dir() / "stiff_out").string(),
                        stiff.string())) == exit_step_underflow);
}

TEST_CASE("bands subcommand") {
  const fs::path cfg = write_config("bands.cfg", "N = 4\n");
  const fs::path out = work_dir() / "bands.csv";
  REQUIRE(cli(fmt::format("bands \"{}\"", cfg.string()), out) == exit_ok);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k_x,k_y,E_plus,E_minus");
  int rows = 0;
  for (std::string line; std::getline(in, line); ++rows) {
    const auto f = split(line);
    REQUIRE(f.size() == 4);
    CHECK(std::stod(f[2]) + std::stod(f[3]) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(rows == 16);
}

TEST_CASE("verify subcommand passes on a small configuration") {
  const fs::path cfg = write_config("verify.cfg", "N = 8\n");
  CHECK(cli(fmt::format("--threads 1 verify \"{}\"", cfg.string())) == exit_ok);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  setenv("LATTICEKIN_THREADS", "2", 1);
  CHECK(resolve_threads(0) == 2);
  unsetenv("LATTICEKIN_THREADS");
  CHECK(resolve_threads(0) == 1);
}
