#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hsprior/dataset.hpp"
#include "hsprior/error.hpp"

using namespace hsprior;

namespace {

Dataset parse(const std::string& text, const std::string& target = "y",
              TargetKind kind = TargetKind::regression) {
  std::istringstream in(text);
  return parse_csv(in, target, kind);
}

std::string error_of(const std::string& text, const std::string& target = "y",
                     TargetKind kind = TargetKind::regression) {
  try {
    parse(text, target, kind);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("CSV parsing") {
  const Dataset d = parse("a,y,b\n1,2,3\n4.5,-1,6e-1\n7,0,9\n");
  REQUIRE(d.n() == 3);
  REQUIRE(d.D() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.X(1, 0) == 4.5);
  CHECK(d.X(1, 1) == 0.6);
  CHECK(d.y(1) == -1.0);
  CHECK(d.X(2, 1) == 9.0);

  CHECK(error_of("a,y\n") == "CSV has a header but no data rows");
  CHECK(error_of("") == "CSV input is empty");
  CHECK(error_of("a,b\n1,2\n").find("'y'") != std::string::npos);
  CHECK(error_of("a,y\n1,2\n3\n").find("ragged") != std::string::npos);
  CHECK(error_of("a,y\n1,x\n") != "");
  CHECK(error_of("a,y\n1,2\n", "y", TargetKind::classification).find("0 or 1") != std::string::npos);
  CHECK(parse("a,y\n1,1\n2,0\n", "y", TargetKind::classification).y(0) == 1.0);
}

TEST_CASE("split sizes, determinism and training moments") {
  const auto p = generate_linear(10, 3, 1, 1.0, 1.0, 4);
  const Dataset a = split_and_standardize(p.data, 0.2, 7);
  const Dataset b = split_and_standardize(p.data, 0.2, 7);
  REQUIRE(a.split);
  CHECK(a.split->train.size() == 8);
  CHECK(a.split->test.size() == 2);
  CHECK(a.split->train == b.split->train);
  CHECK(a.split->test != split_and_standardize(p.data, 0.2, 8).split->test);

  const auto big = generate_linear(200, 5, 1, 1.0, 1.0, 5);
  const Dataset s = split_and_standardize(big.data, 0.2, 1);
  const Dataset tr = train_part(s);
  for (Eigen::Index j = 0; j < tr.D(); ++j) {
    const Eigen::VectorXd c = tr.X.col(j);
    const double m = c.mean();
    const double sd = std::sqrt((c.array() - m).square().sum() / (c.size() - 1.0));
    CHECK(std::abs(m) < 1e-10);
    CHECK(std::abs(sd - 1.0) < 1e-10);
  }
  const Eigen::MatrixXd back = undo_standardization(s.X, *s.standardization);
  CHECK(((back - big.data.X).cwiseAbs().array() <= 1e-10 * big.data.X.cwiseAbs().array().max(1.0)).all());
}

TEST_CASE("classification splits are stratified") {
  Dataset d;
  d.kind = TargetKind::classification;
  d.X.resize(50, 2);
  d.y.resize(50);
  for (int i = 0; i < 50; ++i) {
    d.X(i, 0) = i;
    d.X(i, 1) = (i * 7) % 11;
    d.y(i) = i < 10 ? 1.0 : 0.0;
  }
  const Dataset s = split_and_standardize(d, 0.2, 3);
  int test_ones = 0;
  for (auto i : s.split->test) test_ones += static_cast<int>(d.y(i));
  CHECK(s.split->test.size() == 10);
  CHECK(test_ones == 2);
}

TEST_CASE("constant training columns are rejected by name") {
  Dataset d = parse("a,b,y\n1,5,1\n2,5,2\n3,5,3\n4,5,4\n");
  try {
    standardize(d);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
}

TEST_CASE("synthetic generators") {
  const auto nm = generate_normal_means(400, 20, 6.0, 1);
  CHECK((nm.beta.array() == 6.0).count() == 20);
  CHECK((nm.beta.array() == 0.0).count() == 380);
  CHECK(nm.data.identity_design);
  CHECK(nm.data.X.isIdentity());
  const auto again = generate_normal_means(400, 20, 6.0, 1);
  CHECK(again.data.y == nm.data.y);
  const auto zero = generate_normal_means(50, 5, 0.0, 2);
  CHECK(zero.beta.isZero());
  const auto res = (nm.data.y - nm.beta).eval();
  CHECK(std::abs(res.mean()) < 4.0 / std::sqrt(400.0));

  const auto lg = generate_logistic(80, 200, 5, 2.0, 3);
  CHECK(lg.data.kind == TargetKind::classification);
  CHECK(((lg.data.y.array() == 0.0) || (lg.data.y.array() == 1.0)).all());
  CHECK((lg.beta.array() != 0.0).count() == 5);
}
