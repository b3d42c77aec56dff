#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("homog_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

class CleanupEnv : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(work_dir()); }
};

[[maybe_unused]] auto* const cleanup_env = ::testing::AddGlobalTestEnvironment(new CleanupEnv);

Result cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HOMOG_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / (name + ".ini");
  std::ofstream(p) << text;
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kT2I = R"([geometry]
kind = cross
n = 8
[params]
mu0 = 1
nu0 = 0.5
lambda1 = inf
p_star = inf
rho_f = 1
rho_s = 2
[numerics]
N = 8
dt = 0.05
T = 0.2
[force]
mode = sinsin
time = ramp
amplitude_x = 1
amplitude_y = 0.5
)";

std::string with_params(const std::string& params, const std::string& force = "mode = sinsin\namplitude_x = 1\n") {
  return "[geometry]\nkind = cross\nn = 8\n[params]\n" + params + "[numerics]\nN = 8\ndt = 0.05\nT = 0.2\n[force]\n" + force;
}

std::string arg(const fs::path& p) { return "\"" + p.string() + "\""; }

// Data rows of a CSV with a schema comment and a header line.
std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::istringstream in(read(p));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(CliRegime, RegimeT2CaseI) {
  const auto cfg = write_config("t2i", kT2I);
  const auto r = cli("regime --config " + arg(cfg));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.substr(0, 5), "T2_I\n");
  EXPECT_NE(r.output.find("A_f0"), std::string::npos);
  EXPECT_NE(r.output.find("q_closure"), std::string::npos);
}

TEST(CliRegime, ConstraintViolationNamesParameter) {
  const auto cfg = write_config("lambda0", with_params("mu0 = 1\nlambda0 = 1\n"));
  const auto r = cli("regime --config " + arg(cfg));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("lambda0"), std::string::npos) << r.output;
}

TEST(CliRegime, RegimeT3CaseIV) {
  const auto cfg = write_config("t3iv", with_params("mu0 = 0\nmu1 = 1\nlambda1 = 1\np_star = 1\neta0 = 1\n"));
  const auto r = cli("regime --config " + arg(cfg));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.substr(0, 6), "T3_IV\n");
  EXPECT_NE(r.output.find("coefficients: B_pi_kernel forcing"), std::string::npos) << r.output;
}

TEST(CliErrors, ConfigProblemsExitWithTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("regime").code, 2);
  EXPECT_EQ(cli("regime --config " + arg(work_dir() / "missing.ini")).code, 2);
  const auto m = write_config("maskfile", "[geometry]\nkind = mask\nmask_file = nowhere.mask\n[params]\nmu0 = 1\n");
  const auto r = cli("regime --config " + arg(m));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("not found"), std::string::npos) << r.output;
  std::string viscous = kT2I;
  viscous.replace(viscous.find("T = 0.2"), 7, "T = 0.2\nviscous_tensor = other");
  const auto bad = write_config("badvt", viscous);
  EXPECT_EQ(cli("regime --config " + arg(bad)).code, 2);
  const auto stages = write_config("stages", kT2I + "[pipeline]\nstages = geometry macro\n");
  EXPECT_EQ(cli("regime --config " + arg(stages)).code, 2);
}

TEST(CliCell, WritesCoefficients) {
  const auto cfg = write_config("cell", kT2I);
  const fs::path out = work_dir() / "cell_out";
  const auto r = cli("cell --config " + arg(cfg) + " --out " + arg(out));
  EXPECT_EQ(r.code, 0) << r.output;
  ASSERT_TRUE(fs::exists(out / "coefficients.json"));
  EXPECT_NE(read(out / "coefficients.json").find("\"A_f0\""), std::string::npos);
  EXPECT_NE(r.output.find("regime T2_I"), std::string::npos);
}

TEST(CliRun, ZeroForceGivesZeroColumns) {
  const auto cfg = write_config("zero", with_params("mu0 = 1\nlambda1 = inf\n", "mode = zero\n"));
  const fs::path out = work_dir() / "zero_out";
  const auto r = cli("run --config " + arg(cfg) + " --out " + arg(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = csv_rows(out / "timeseries.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& row : rows)
    for (std::size_t k = 2; k < row.size(); ++k) EXPECT_EQ(row[k], 0.0);
  for (const char* f : {"manifest.json", "run.json", "pairings.csv", "fields/v.txt"}) EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(CliRun, ByteIdenticalAcrossInvocations) {
  const auto cfg = write_config("det", kT2I);
  const fs::path a = work_dir() / "det_a", b = work_dir() / "det_b";
  ASSERT_EQ(cli("run --config " + arg(cfg) + " --out " + arg(a)).code, 0);
  ASSERT_EQ(cli("run --config " + arg(cfg) + " --out " + arg(b) + " --workers 2").code, 0);
  for (const char* f : {"coefficients.json", "timeseries.csv", "pairings.csv", "fields/v.txt", "run.json"})
    EXPECT_EQ(read(a / f), read(b / f)) << f;
  const auto rows = csv_rows(a / "timeseries.csv");
  EXPECT_GT(rows.back()[2], 0.0);
  for (const auto& row : rows) EXPECT_EQ(row[7], 0.0);  // boundary_max
}

TEST(CliRun, SolidDisplacementColumnForLambdaZero) {
  const auto cfg = write_config("t2ii", with_params("mu0 = 1\nlambda1 = 0\np_star = 2\nrho_s = 2\n"));
  const fs::path out = work_dir() / "t2ii_out";
  const auto r = cli("run --config " + arg(cfg) + " --out " + arg(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string ts = read(out / "timeseries.csv");
  EXPECT_NE(ts.find("regime=T2_II_LAM_ZERO"), std::string::npos);
  EXPECT_NE(ts.find(",w_s_norm,w_f_norm,"), std::string::npos);
  const auto rows = csv_rows(out / "timeseries.csv");
  EXPECT_GT(rows.back()[4], 0.0);
  EXPECT_TRUE(fs::exists(out / "fields/w_s.txt"));
}

TEST(CliRun, MissingCoefficientsWithoutCellStage) {
  const auto cfg = write_config("nocell", kT2I + "[pipeline]\nstages = geometry\n");
  const auto r = cli("run --config " + arg(cfg) + " --out " + arg(work_dir() / "nocell_out"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("coefficients file not found"), std::string::npos) << r.output;
}

TEST(CliCompare, MismatchedHorizonIsIncompatible) {
  const auto cfg = write_config("cmp", kT2I);
  const fs::path out = work_dir() / "cmp_out";
  ASSERT_EQ(cli("run --config " + arg(cfg) + " --out " + arg(out)).code, 0);
  std::string longer = kT2I;
  longer.replace(longer.find("T = 0.2"), 7, "T = 0.4");
  const auto cfg2 = write_config("cmp_long", longer);
  const auto r = cli("compare --config " + arg(cfg2) + " --out " + arg(out));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("horizon"), std::string::npos) << r.output;
  const auto r2 = cli("compare --config " + arg(work_dir() / "cmp.ini") + " --out " + arg(out));
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.output.find("scaling"), std::string::npos) << r2.output;
}

TEST(CliCompare, SmallSweepWritesReport) {
  const std::string text = R"([geometry]
kind = cross
n = 8
[params]
rho_f = 1
rho_s = 2
[scaling]
tau = 1 0
mu = 1 0
nu = 1 0
p = 1 -1
eta = 1 -1
lambda = 1 1
[numerics]
N = 8
dt = 0.05
T = 0.2
[force]
amplitude_x = 1
[dns]
eps = 1/2 1/4
N = 16
)";
  const auto cfg = write_config("sweep", text);
  const fs::path out = work_dir() / "sweep_out";
  const auto run = cli("run --config " + arg(cfg) + " --out " + arg(out));
  ASSERT_EQ(run.code, 0) << run.output;
  const auto r = cli("compare --config " + arg(cfg) + " --out " + arg(out));
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string rep = read(out / "compare.json");
  EXPECT_NE(rep.find("\"discrepancy_monotone\""), std::string::npos);
  EXPECT_NE(rep.find("\"renormalized_mean\""), std::string::npos);
  EXPECT_NE(r.output.find("eps 0.25"), std::string::npos);
}
