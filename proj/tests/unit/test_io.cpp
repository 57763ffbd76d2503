#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "hsprior/io.hpp"

using namespace hsprior;

TEST_CASE("doubles round-trip through their text form") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = io::format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("draws CSV round-trips") {
  PosteriorDraws d;
  d.likelihood = LikelihoodKind::gaussian;
  d.beta.resize(4, 2);
  d.beta << 0.1, -0.2, 1.0 / 3.0, 4.0, 5e-9, 6.0, -7.0, 8.5;
  d.lambda = d.beta.cwiseAbs().array() + 1.0;
  d.intercept = Eigen::Vector4d(0.5, 0.6, 0.7, 0.8);
  d.tau = Eigen::Vector4d(0.01, 0.02, 0.03, 0.04);
  d.sigma = Eigen::Vector4d(1.1, 1.2, 1.3, 1.4);
  d.chain = {0, 0, 1, 1};
  d.iteration = {0, 1, 0, 1};
  d.divergent = {0, 1, 0, 0};
  d.num_chains = 2;
  d.draws_per_chain = 2;
  std::istringstream in(io::draws_csv(d));
  const PosteriorDraws r = io::parse_draws_csv(in);
  CHECK(r.beta == d.beta);
  CHECK(r.lambda == d.lambda);
  CHECK(r.sigma == d.sigma);
  CHECK(r.tau == d.tau);
  CHECK(r.divergent == d.divergent);
  CHECK(r.num_chains == 2);
  CHECK(io::draws_csv(r) == io::draws_csv(d));

  std::istringstream bad("chain,iteration\n1,2\n");
  CHECK_THROWS(io::parse_draws_csv(bad));
}

TEST_CASE("atomic writes and the output directory") {
  const auto dir = std::filesystem::temp_directory_path() / "hsprior_io_test";
  std::filesystem::remove_all(dir);
  io::write_file_atomic(dir / "sub" / "a.txt", "hello\n");
  CHECK(io::read_file(dir / "sub" / "a.txt") == "hello\n");
  io::write_file_atomic(dir / "sub" / "a.txt", "x");
  CHECK(io::read_file(dir / "sub" / "a.txt") == "x");
  CHECK_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.tmp"));
  std::filesystem::remove_all(dir);

  CHECK(io::output_directory(std::string("given")) == "given");
  setenv(io::kOutputDirEnv, "from-env", 1);
  CHECK(io::output_directory(std::nullopt) == "from-env");
  unsetenv(io::kOutputDirEnv);
  CHECK(io::output_directory(std::nullopt) == "hsprior-out");
}

TEST_CASE("manifest records versions and optional timings") {
  const auto m = io::manifest("fit", {{"a", 1}}, 42, std::nullopt);
  CHECK(m["seed"] == 42);
  CHECK(m["versions"].contains("eigen"));
  CHECK_FALSE(m.contains("wall_seconds"));
  CHECK(io::manifest("fit", {}, 1, 2.5)["wall_seconds"] == 2.5);
}
