#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "app/commands.hpp"
#include "app/csv.hpp"
#include "app/run_config.hpp"

using namespace qlimits::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qlimits_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& body) {
    const auto path = dir_ / name;
    std::ofstream(path) << body << "[output]\nprefix = " << (dir_ / "run").string() << "\n";
    return path;
  }

  int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"qlimits"};
    for (auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kDisplaced =
    "[model]\nkind = displaced_gaussian\nwaist = 1\n"
    "[illumination]\nN = 1e6\nsigma_P2 = 1\n";

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(5e-4), "5e-04");
  EXPECT_EQ(format_number(1e6), "1e+06");
  EXPECT_EQ(format_number(123.5), "123.5");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(CsvTable, HeaderQuotingAndWidth) {
  CsvTable t({"a", "b"});
  CsvTable::Row r;
  r.add(std::string("x,y")).add(2.5);
  t.append(std::move(r));
  EXPECT_EQ(t.str(), "a,b\n\"x,y\",2.5\n");
  CsvTable::Row short_row;
  short_row.add(1.0);
  EXPECT_THROW(t.append(std::move(short_row)), std::logic_error);
}

TEST(RunConfig, ParseDefaultsAndRoundTrip) {
  const auto cfg = parse_config(
      "# comment\n[model]\nkind = phase_tilt\nwaist = 2\nkappa = 0.5\n"
      "[grid]\npoints = 128\n[illumination]\nN = 100\nsigma_P2 = 0.5\n"
      "[scheme]\nkind = field\nlo_ratio = 1000\n[mc]\nn_trials = 500\nseed = 42\ntrue_p = 0.01\n"
      "[sweep]\naxis = sigma_P2\nvalues = 1, 0.5, 0.25\n");
  EXPECT_EQ(cfg.model.kind, "phase_tilt");
  EXPECT_EQ(cfg.model.kappa, 0.5);
  EXPECT_FALSE(cfg.grid.extent.has_value());
  EXPECT_EQ(cfg.grid.points, 128u);
  EXPECT_EQ(cfg.illumination.effective_sigma_Q2(), 2.0);
  EXPECT_EQ(cfg.scheme, SchemeChoice::field);
  EXPECT_EQ(cfg.mc->seed, 42u);
  EXPECT_EQ(cfg.sweep->values, (std::vector<double>{1, 0.5, 0.25}));
  EXPECT_EQ(parse_config(format_config(cfg)), cfg);

  const auto custom = parse_config("[model]\nkind = custom\nname = tilted\nexpression = exp(-(x-p)^2/w^2) * exp(i*p*x)\n");
  EXPECT_EQ(parse_config(format_config(custom)), custom);
}

TEST(RunConfig, ConsolidatedErrors) {
  try {
    parse_config("[model]\nwaist = abc\ncolour = red\n[bogus]\nx = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 3u) << e.what();
  }
  auto cfg = parse_config("[illumination]\nN = -1\nsigma_P2 = 0.25\nsigma_Q2 = 1\n[scheme]\nlo_ratio = 10\n");
  try {
    validate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_GE(e.problems().size(), 3u) << e.what();
  }
}

TEST_F(CliTest, BoundsRow) {
  ASSERT_EQ(run({"bounds", "--config", write_config("a.ini", kDisplaced).string()}), kSuccess) << err_.str();
  const auto lines = csv_lines(slurp(dir_ / "run_bounds.csv"));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "model,N,sigma_P2,sigma_Q2,a,b,fisher_poisson,fisher_gauss,crb_intensity,crb_field");
  const auto row = split(lines[1]);
  EXPECT_EQ(row[0], "displaced_gaussian");
  EXPECT_NEAR(std::stod(row[4]), 1.0, 1e-5);
  EXPECT_NEAR(std::stod(row[5]), 1.0, 1e-5);
  EXPECT_NEAR(std::stod(row[8]), 5e-4, 5e-9);
  EXPECT_NEAR(std::stod(row[9]), 5e-4, 5e-9);
  EXPECT_TRUE(fs::exists(dir_ / "run_config"));
  EXPECT_EQ(load_config((dir_ / "run_config").string()), load_config((dir_ / "a.ini").string()));
}

TEST_F(CliTest, TiltWritesInf) {
  const auto cfg = write_config("t.ini", "[model]\nkind = phase_tilt\n");
  ASSERT_EQ(run({"bounds", "--config", cfg.string()}), kSuccess) << err_.str();
  const auto row = split(csv_lines(slurp(dir_ / "run_bounds.csv"))[1]);
  EXPECT_EQ(row[4], "inf");
  EXPECT_EQ(row[8], "inf");
  EXPECT_TRUE(std::isfinite(std::stod(row[9])));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"bounds", "--config", (dir_ / "missing.ini").string()}), kConfigError);
  EXPECT_FALSE(err_.str().empty());
  EXPECT_EQ(run({"bounds"}), kConfigError);
  EXPECT_EQ(run({"frobnicate"}), kConfigError);
  EXPECT_EQ(run({"bounds", "--config", write_config("h.ini", "[illumination]\nsigma_P2 = 0.5\nsigma_Q2 = 1\n").string()}),
            kConfigError);
  EXPECT_EQ(run({"simulate", "--config", write_config("nomc.ini", kDisplaced).string()}), kConfigError);
  const auto flat = write_config("flat.ini", "[model]\nkind = custom\nexpression = exp(-x^2)\n");
  EXPECT_EQ(run({"bounds", "--config", flat.string()}), kNumericError);
  EXPECT_NE(err_.str().find("parameter not encoded"), std::string::npos) << err_.str();
}

TEST_F(CliTest, SimulateIsReproducibleAcrossThreads) {
  const auto cfg = write_config("s.ini", std::string(kDisplaced) + "[mc]\nn_trials = 2000\nseed = 5\n");
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--threads", "1", "--out", (dir_ / "t1").string()}), kSuccess)
      << err_.str();
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--threads", "4", "--out", (dir_ / "t4").string()}), kSuccess);
  const auto one = slurp(dir_ / "t1_mc.csv");
  EXPECT_EQ(one, slurp(dir_ / "t4_mc.csv"));
  const auto lines = csv_lines(one);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "scheme,noise_kind,n_trials,seed,true_p,mean_estimate,std_estimate,crb,efficiency_ratio");
  EXPECT_EQ(split(lines[1])[0], "intensity");
  EXPECT_EQ(split(lines[2])[0], "field");
  EXPECT_EQ(split(lines[1])[3], "5");

  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--seed", "6", "--out", (dir_ / "s6").string()}), kSuccess);
  const auto reseeded = csv_lines(slurp(dir_ / "s6_mc.csv"));
  EXPECT_EQ(split(reseeded[1])[3], "6");
  EXPECT_NE(reseeded[1], lines[1]);
}

TEST_F(CliTest, SweepOverN) {
  const auto cfg = write_config("w.ini", kDisplaced);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--axis", "N", "--values", "100,10000,1000000"}), kSuccess)
      << err_.str();
  const auto lines = csv_lines(slurp(dir_ / "run_sweep.csv"));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(split(lines[0])[0], "axis");
  const double c0 = std::stod(split(lines[1])[10]);
  for (int i = 1; i <= 3; ++i) {
    const auto row = split(lines[i]);
    EXPECT_EQ(row[0], "N");
    const double N = std::stod(row[1]);
    EXPECT_NEAR(std::stod(row[10]) * std::sqrt(N) / (c0 * 10), 1.0, 1e-9);
  }
  EXPECT_EQ(run({"sweep", "--config", cfg.string(), "--axis", "width", "--values", "1"}), kConfigError);
  EXPECT_EQ(run({"sweep", "--config", cfg.string()}), kConfigError);
}
