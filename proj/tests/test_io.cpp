// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spca/greedy.hpp"
#include "spca/io.hpp"

using namespace spca;
namespace fs = std::filesystem;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::IoError;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("spca_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST(ParseCsv, CovarianceExample) {
  const auto c = to_covariance(parse_csv("2,1\n1,2"));
  Matrix want(2, 2);
  want << 2, 1, 1, 2;
  EXPECT_EQ(c.sigma.matrix(), want);
  EXPECT_TRUE(c.names.empty());
}

TEST(ParseCsv, HeaderNames) {
  const auto d = parse_csv("a,b\n1,2\n3,4\n");
  EXPECT_EQ(d.rows(), 2);
  EXPECT_EQ(d.cols(), 2);
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.values(1, 0), 3.0);
}

TEST(ParseCsv, WhitespaceCrlfAndBlankLines) {
  const auto d = parse_csv(" x , y \r\n1.5, -2e-3\r\n\r\n+4,5\r\n");
  EXPECT_EQ(d.names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d.rows(), 2);
  EXPECT_DOUBLE_EQ(d.values(0, 1), -2e-3);
  EXPECT_DOUBLE_EQ(d.values(1, 0), 4.0);
}

TEST(ParseCsv, Errors) {
  EXPECT_EQ(code_of([] { to_covariance(parse_csv("2,1\n0.9,2")); }), ErrorCode::AsymmetricInput);
  EXPECT_EQ(code_of([] { parse_csv("1,2\n3\n"); }), ErrorCode::RaggedRows);
  EXPECT_EQ(code_of([] { parse_csv("a,b,c\n1,2\n"); }), ErrorCode::RaggedRows);
  EXPECT_EQ(code_of([] { parse_csv(""); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("a,b\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { to_covariance(parse_csv("1,2,3\n4,5,6\n")); }), ErrorCode::BadShape);
  try {
    parse_csv("1,2\n3,oops\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("row 2, column 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { parse_csv("1,nan\n"); }), ErrorCode::ParseError);
}

TEST(ParseCsv, SmallAsymmetryIsSymmetrized) {
  const auto c = to_covariance(parse_csv("2,1\n1.0000000001,2"));
  EXPECT_EQ(c.sigma(0, 1), c.sigma(1, 0));
}

TEST(SampleCovariance, Examples) {
  DataMatrix d{Matrix(2, 2), {}};
  d.values << 1, 0, -1, 0;
  Matrix want(2, 2);
  want << 2, 0, 0, 0;
  EXPECT_EQ(sample_covariance(d).matrix(), want);

  DataMatrix c{Matrix(3, 2), {}};
  c.values << 1, 7, 2, 7, 5, 7;
  EXPECT_EQ(sample_covariance(c)(1, 1), 0.0);

  EXPECT_EQ(code_of([] { sample_covariance(DataMatrix{Matrix::Ones(1, 3), {}}); }), ErrorCode::TooFewRows);
}

TEST(SampleCovariance, MatchesTwoPass) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(2.0, 3.0);
  DataMatrix d{Matrix(50, 6), {}};
  for (Index i = 0; i < 50; ++i)
    for (Index j = 0; j < 6; ++j) d.values(i, j) = g(rng);
  EXPECT_LE((sample_covariance(d).matrix() - oracle::two_pass_covariance(d.values)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LogReturns, Examples) {
  DataMatrix one{Matrix(2, 1), {"asset"}};
  one.values << 1.0, std::exp(1.0);
  const auto r = log_returns(one);
  EXPECT_EQ(r.rows(), 1);
  EXPECT_NEAR(r.values(0, 0), 1.0, 1e-15);
  EXPECT_EQ(r.names, one.names);

  DataMatrix flat{Matrix::Constant(4, 2, 3.5), {}};
  EXPECT_TRUE(log_returns(flat).values.isZero(0.0));

  DataMatrix geo{Matrix(10, 1), {}};
  geo.values(0, 0) = 100.0;
  for (Index t = 1; t < 10; ++t) geo.values(t, 0) = geo.values(t - 1, 0) * 1.01;
  for (Index t = 0; t < 9; ++t) EXPECT_NEAR(log_returns(geo).values(t, 0), std::log(1.01), 1e-14);

  DataMatrix bad{Matrix::Ones(3, 2), {}};
  bad.values(2, 1) = 0.0;
  EXPECT_EQ(code_of([&] { log_returns(bad); }), ErrorCode::NonPositivePrice);
  EXPECT_EQ(code_of([] { log_returns(DataMatrix{Matrix::Ones(1, 2), {}}); }), ErrorCode::TooFewRows);
}

TEST_F(TempDir, LoadMatrixKinds) {
  const auto cov = write("cov.csv", "3,0,0\n0,2,0\n0,0,1\n");
  const auto loaded = load_matrix(cov, MatrixKind::covariance);
  ASSERT_TRUE(std::holds_alternative<CovarianceInput>(loaded));
  EXPECT_EQ(std::get<CovarianceInput>(loaded).sigma(0, 0), 3.0);

  const auto data = write("data.csv", "a,b\n1,2\n3,5\n");
  const auto d = std::get<DataMatrix>(load_matrix(data, MatrixKind::data));
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));

  EXPECT_EQ(code_of([&] { load_data(dir_ / "missing.csv"); }), ErrorCode::IoError);
}

TEST_F(TempDir, AtomicWriteReplacesWholeFile) {
  const auto p = dir_ / "out.txt";
  atomic_write(p, "first version, longer text\n");
  atomic_write(p, "second\n");
  EXPECT_EQ(read_file(p), "second\n");
  for (const auto& entry : fs::directory_iterator(dir_)) {
    EXPECT_EQ(entry.path().filename().string().find(".tmp."), std::string::npos);
  }
}

TEST(RunReport, RoundTrip) {
  RunReport r;
  r.method = "greedy";
  r.params = {{"k", 2}, {"epsilon", 1e-3}, {"input", "cov.csv"}};
  r.seed = 42;
  Matrix m(3, 3);
  m << 3, 0.1, 0, 0.1, 2, 0, 0, 0, 1;
  const SymmetricMatrix s(m);
  r.components.push_back(make_component_report(greedy_full(s, 2).components.back(), {"alpha", "beta", "gamma"}));
  r.bounds = {{"gap", 0.1 / 3.0}, {"certified", true}};
  r.timing_ms = 1.0 / 7.0;

  const auto text = serialize(r);
  const auto back = parse_report(text);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(back.components[0].support, (std::vector<long>{1, 2}));
  EXPECT_EQ(back.components[0].support_names, (std::vector<std::string>{"alpha", "beta"}));

  r.seed.reset();
  EXPECT_EQ(parse_report(serialize(r)), r);
  EXPECT_EQ(code_of([] { parse_report("{not json"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_report("{\"method\": 3}"); }), ErrorCode::ParseError);
}

TEST(RunReport, ZeroComponentAndDefaultNames) {
  const auto zero = make_component_report(SparseComponent::zero(3));
  EXPECT_TRUE(zero.support.empty());
  EXPECT_EQ(zero.loadings, (std::vector<double>{0, 0, 0}));
  const auto c = make_component_report(pattern_solution(SymmetricMatrix::identity(3), SparsityPattern({2}, 3)));
  EXPECT_EQ(c.support_names, std::vector<std::string>{"x3"});
}

TEST(FormatCsv, Table) {
  EXPECT_EQ(format_csv({"k", "variance"}, {{"1", format_double(0.1)}, {"2", format_double(3.0)}}),
            "k,variance\n1,0.10000000000000001\n2,3\n");
}
