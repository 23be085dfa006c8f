#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "monarch/butterfly.hpp"
#include "monarch/random.hpp"
#include "monarch_cli/commands.hpp"
#include "monarch_cli/formats.hpp"

namespace monarch::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("monarch_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int cli(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write_text(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

double report_value(const std::string& report, const std::string& key) {
  std::istringstream is(report);
  std::string k;
  std::string v;
  while (is >> k) {
    std::getline(is, v);
    if (k == key) return std::stod(v);
  }
  return -1.0;
}

TEST(Formats, DmatRoundTripIsBitwise) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    std::ostringstream os;
    if (s % 2 == 0) {
      auto a = rng.matrix<double>(1 + s % 7, 1 + s % 5);
      for (double& v : a.data()) v *= std::pow(10.0, static_cast<double>(s % 40) - 20.0);
      write_dmat(os, a);
      std::istringstream is(os.str());
      EXPECT_EQ(std::get<DenseMatrix<double>>(read_dmat(is)), a);
    } else {
      auto a = rng.matrix<cplx>(1 + s % 6, 1 + s % 4);
      write_dmat(os, a);
      std::istringstream is(os.str());
      auto back = std::get<DenseMatrix<cplx>>(read_dmat(is));
      EXPECT_EQ(back, a);
      std::ostringstream again;
      write_dmat(again, back);
      EXPECT_EQ(again.str(), os.str());
    }
  }
}

TEST(Formats, MonRoundTripIsBitwise) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::ostringstream os;
    if (s % 2 == 0) {
      auto m = random_monarch<double>(16, s % 4 == 0 ? 4 : 2, s);
      write_mon(os, m);
      std::istringstream is(os.str());
      EXPECT_EQ(std::get<MonarchMatrix<double>>(read_mon(is)), m);
    } else {
      auto m = random_monarch<cplx>(12, 3, s);
      write_mon(os, m);
      std::istringstream is(os.str());
      EXPECT_EQ(std::get<MonarchMatrix<cplx>>(read_mon(is)), m);
    }
  }
}

TEST(Formats, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  Rng rng(1);
  char buf[64];
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.normal() * 50.0);
    std::snprintf(buf, sizeof buf, "%.17g", v);
    EXPECT_EQ(format_number(v), buf);
  }
}

TEST(Formats, MalformedInputsThrow) {
  for (const std::string text : {"dmat 2 2 real\n1 2 3\n", "dmat 2 2 real\n1 2 3 4 5\n", "dmat 2 x real\n",
                                 "dmat 1 1 quaternion\n1\n", "matrix 1 1 real\n1\n", "dmat 1 1 real\nabc\n",
                                 "monarch 4 4 real\n", "monarch 4 2 real\n1 2 3 4\n", ""}) {
    std::istringstream is(text);
    EXPECT_THROW(read_any(is), FormatError) << text;
  }
}

TEST_F(CliTest, GenHadamardIsSylvester) {
  ASSERT_EQ(cli({"gen", "--kind", "hadamard", "--n", "4", "--out", path("h.dmat")}), 0);
  EXPECT_EQ(slurp(path("h.dmat")), "dmat 4 4 real\n1 1 1 1\n1 -1 1 -1\n1 1 -1 -1\n1 -1 -1 1\n");
}

TEST_F(CliTest, GenIsDeterministic) {
  ASSERT_EQ(cli({"gen", "--kind", "monarch", "--n", "16", "--b", "4", "--seed", "7", "--out", path("a.mon")}), 0);
  ASSERT_EQ(cli({"--seed", "7", "gen", "--kind", "monarch", "--n", "16", "--b", "4", "--out", path("b.mon")}), 0);
  EXPECT_EQ(slurp(path("a.mon")), slurp(path("b.mon")));
  ASSERT_EQ(cli({"gen", "--kind", "monarch", "--n", "16", "--b", "4", "--seed", "8", "--out", path("c.mon")}), 0);
  EXPECT_NE(slurp(path("a.mon")), slurp(path("c.mon")));
}

TEST_F(CliTest, GenDftMatchesDirect) {
  ASSERT_EQ(cli({"gen", "--kind", "dft", "--n", "16", "--out", path("f.dmat")}), 0);
  auto got = std::get<DenseMatrix<cplx>>(load_dense(path("f.dmat")));
  EXPECT_LE(frobenius_norm(subtract(got, dft_matrix(16))), 1e-12 * 16.0);
}

TEST_F(CliTest, GenValidation) {
  EXPECT_EQ(cli({"gen", "--kind", "dft", "--n", "6", "--out", path("x")}), 2);
  EXPECT_FALSE(err_.str().empty());
  EXPECT_EQ(cli({"gen", "--kind", "monarch", "--n", "16", "--b", "3", "--out", path("x")}), 2);
  EXPECT_EQ(cli({"gen", "--kind", "monarch", "--n", "12", "--out", path("x")}), 2);
  EXPECT_EQ(cli({"gen", "--kind", "spiral", "--n", "4", "--out", path("x")}), 2);
  EXPECT_EQ(cli({"gen", "--n", "4", "--out", path("x")}), 2);
  EXPECT_EQ(cli({}), 2);
}

TEST_F(CliTest, ProjectMemberHasTinyResidual) {
  ASSERT_EQ(cli({"gen", "--kind", "monarch", "--n", "16", "--b", "4", "--out", path("m.mon")}), 0);
  ASSERT_EQ(cli({"project", "--in", path("m.mon"), "--b", "4", "--out", path("p.mon"), "--report", path("r.txt")}), 0);
  EXPECT_LE(report_value(slurp(path("r.txt")), "relative_residual"), 1e-11);
  auto a = std::get<DenseMatrix<double>>(load_dense(path("m.mon")));
  auto p = std::get<DenseMatrix<double>>(load_dense(path("p.mon")));
  EXPECT_LE(frobenius_norm(subtract(a, p)) / frobenius_norm(a), 1e-11);
}

TEST_F(CliTest, ProjectIsDeterministicAndIdempotent) {
  ASSERT_EQ(cli({"gen", "--kind", "dense-random", "--n", "16", "--out", path("a.dmat")}), 0);
  ASSERT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "4", "--out", path("p1.mon"), "--report", path("r1")}), 0);
  ASSERT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "4", "--out", path("p2.mon"), "--report", path("r2")}), 0);
  EXPECT_EQ(slurp(path("r1")), slurp(path("r2")));
  EXPECT_EQ(slurp(path("p1.mon")), slurp(path("p2.mon")));
  ASSERT_EQ(cli({"project", "--in", path("p1.mon"), "--b", "4", "--out", path("p3.mon"), "--report", path("r3")}), 0);
  EXPECT_LE(report_value(slurp(path("r3")), "relative_residual"), 1e-11);
}

TEST_F(CliTest, ProjectErrors) {
  EXPECT_EQ(cli({"project", "--in", path("missing.dmat"), "--out", path("p.mon")}), 3);
  write_text(path("bad.dmat"), "dmat 4 4 real\n1 2\n");
  EXPECT_EQ(cli({"project", "--in", path("bad.dmat"), "--b", "2", "--out", path("p.mon")}), 3);
  ASSERT_EQ(cli({"gen", "--kind", "dense-random", "--n", "16", "--out", path("a.dmat")}), 0);
  EXPECT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "5", "--out", path("p.mon")}), 2);
  write_text(path("rect.dmat"), "dmat 2 4 real\n1 2 3 4\n5 6 7 8\n");
  EXPECT_EQ(cli({"project", "--in", path("rect.dmat"), "--b", "2", "--out", path("p.mon")}), 2);
}

TEST_F(CliTest, FactorizeConstructedInstance) {
  ASSERT_EQ(cli({"gen", "--kind", "mmstar", "--n", "16", "--b", "4", "--seed", "3", "--out", path("m.dmat")}), 0);
  ASSERT_EQ(cli({"factorize", "--in", path("m.dmat"), "--b", "4", "--out-prefix", path("f")}), 0);
  EXPECT_LE(report_value(out_.str(), "relative_reconstruction_error"), 1e-8);
  auto m = to_complex(std::get<DenseMatrix<double>>(load_dense(path("m.dmat"))));
  auto l1 = std::get<DenseMatrix<cplx>>(load_dense(path("f.l1.dmat")));
  auto r = std::get<DenseMatrix<cplx>>(load_dense(path("f.r.dmat")));
  auto l2 = std::get<DenseMatrix<cplx>>(load_dense(path("f.l2.dmat")));
  EXPECT_LE(frobenius_norm(subtract(matmul(matmul(l1, r), l2), m)) / frobenius_norm(m), 1e-8);
  EXPECT_TRUE(fs::exists(path("f.report.txt")));
}

TEST_F(CliTest, FactorizeIdentityNamesAssumption) {
  std::ostringstream os;
  write_dmat(os, DenseMatrix<double>::identity(16));
  write_text(path("i.dmat"), os.str());
  EXPECT_EQ(cli({"factorize", "--in", path("i.dmat"), "--b", "4", "--out-prefix", path("f")}), 4);
  EXPECT_NE(err_.str().find("Assumption 1"), std::string::npos);
}

TEST_F(CliTest, FactorizeMalformedHeader) {
  write_text(path("bad.dmat"), "dmatrix 16 16 real\n");
  EXPECT_EQ(cli({"factorize", "--in", path("bad.dmat"), "--b", "4", "--out-prefix", path("f")}), 3);
}

TEST_F(CliTest, MatvecMatchesDense) {
  ASSERT_EQ(cli({"gen", "--kind", "monarch", "--n", "16", "--b", "4", "--out", path("m.mon")}), 0);
  Rng rng(5);
  DenseMatrix<double> x = rng.matrix<double>(16, 1);
  std::ostringstream os;
  write_dmat(os, x);
  write_text(path("x.dmat"), os.str());
  ASSERT_EQ(cli({"matvec", "--matrix", path("m.mon"), "--x", path("x.dmat"), "--out", path("y.dmat")}), 0);
  auto m = std::get<DenseMatrix<double>>(load_dense(path("m.mon")));
  auto y = std::get<DenseMatrix<double>>(load_dense(path("y.dmat")));
  auto want = matmul(m, x);
  EXPECT_LE(frobenius_norm(subtract(y, want)), 1e-12 * frobenius_norm(want));
  EXPECT_EQ(cli({"matvec", "--matrix", path("m.mon"), "--x", path("m.mon")}), 2);
}

TEST_F(CliTest, BenchFlopColumns) {
  ASSERT_EQ(cli({"bench", "--sizes", "1024", "--b-policy", "sqrt", "--reps", "1"}), 0);
  std::istringstream is(out_.str());
  std::string header;
  std::getline(is, header);
  std::size_t n, b;
  std::uint64_t dense, mon;
  std::string ratio;
  is >> n >> b >> dense >> mon >> ratio;
  EXPECT_EQ(n, 1024u);
  EXPECT_EQ(b, 32u);
  EXPECT_EQ(dense, 1048576u);
  EXPECT_EQ(mon, 65536u);
  EXPECT_EQ(ratio, "16");
}

TEST_F(CliTest, BenchFlopsIndependentOfReps) {
  auto flops = [&](const std::string& reps) {
    EXPECT_EQ(cli({"bench", "--sizes", "64,256", "--b-policy", "fixed:8", "--reps", reps}), 0);
    std::istringstream is(out_.str());
    std::string line;
    std::getline(is, line);
    std::vector<std::string> cols;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string a, b, c, d;
      ls >> a >> b >> c >> d;
      cols.push_back(a + b + c + d);
    }
    return cols;
  };
  EXPECT_EQ(flops("1"), flops("5"));
}

TEST_F(CliTest, BenchValidation) {
  EXPECT_EQ(cli({"bench", "--sizes", "1000"}), 2);
  EXPECT_EQ(cli({"bench", "--sizes", "64", "--b-policy", "fixed:5"}), 2);
  EXPECT_EQ(cli({"bench", "--sizes", "64", "--b-policy", "golden"}), 2);
  EXPECT_EQ(cli({"bench", "--sizes", "64", "--reps", "0"}), 2);
}

TEST_F(CliTest, VerifyBlockDiagonal) {
  BlockDiagMatrix<double> r(std::vector<DenseMatrix<double>>{DenseMatrix<double>(2, 2, {1, 2, 3, 4}),
                                                             DenseMatrix<double>(2, 2, {5, 6, 7, 8})});
  std::ostringstream os;
  write_dmat(os, r.to_dense());
  write_text(path("bd.dmat"), os.str());
  EXPECT_EQ(cli({"verify", "--in", path("bd.dmat"), "--class", "bd", "--b", "2"}), 0);
  EXPECT_EQ(cli({"verify", "--in", path("bd.dmat"), "--class", "bd", "--b", "1"}), 1);
  EXPECT_NE(out_.str().find("(0, 1)"), std::string::npos);
  EXPECT_EQ(cli({"verify", "--in", path("bd.dmat"), "--class", "bd", "--b", "3"}), 2);
  EXPECT_EQ(cli({"verify", "--in", path("missing"), "--class", "bd", "--b", "2"}), 3);
}

TEST_F(CliTest, VerifyDiagBlock) {
  auto d = DiagBlockMatrix<double>::identity(2, 4);
  d.diag(0, 1)[1] = 3.0;
  std::ostringstream os;
  write_dmat(os, d.to_dense());
  write_text(path("db.dmat"), os.str());
  EXPECT_EQ(cli({"verify", "--in", path("db.dmat"), "--class", "db", "--b", "2"}), 0);
  EXPECT_EQ(cli({"verify", "--in", path("db.dmat"), "--class", "bd", "--b", "2"}), 1);
  EXPECT_NE(out_.str().find("(1, 3)"), std::string::npos);
}

TEST_F(CliTest, PipelineGenProjectVerify) {
  ASSERT_EQ(cli({"gen", "--kind", "dense-random", "--n", "16", "--out", path("a.dmat")}), 0);
  ASSERT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "4", "--out", path("p.mon")}), 0);
  EXPECT_EQ(cli({"verify", "--in", path("p.mon"), "--class", "monarch-slices", "--b", "4"}), 0);
  EXPECT_EQ(cli({"verify", "--in", path("a.dmat"), "--class", "monarch-slices", "--b", "4"}), 1);
  EXPECT_NE(out_.str().find("slice (0, 0)"), std::string::npos);
}

TEST_F(CliTest, ThreadsFromEnvironment) {
  ::setenv("MONARCH_THREADS", "3", 1);
  ASSERT_EQ(cli({"gen", "--kind", "dense-random", "--n", "16", "--out", path("a.dmat")}), 0);
  ASSERT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "4", "--out", path("p3.mon")}), 0);
  ::setenv("MONARCH_THREADS", "bogus", 1);
  EXPECT_EQ(cli({"project", "--in", path("a.dmat"), "--b", "4", "--out", path("px.mon")}), 2);
  ::unsetenv("MONARCH_THREADS");
  ASSERT_EQ(cli({"--threads", "1", "project", "--in", path("a.dmat"), "--b", "4", "--out", path("p1.mon")}), 0);
  EXPECT_EQ(slurp(path("p1.mon")), slurp(path("p3.mon")));
}

TEST_F(CliTest, HelpExitsZero) {
  EXPECT_EQ(cli({"--help"}), 0);
  EXPECT_NE(out_.str().find("factorize"), std::string::npos);
}

}  // namespace
}  // namespace monarch::cli
