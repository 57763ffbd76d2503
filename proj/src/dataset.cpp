#include "hsprior/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hsprior/distributions.hpp"
#include "hsprior/error.hpp"
#include "hsprior/glm_approx.hpp"

namespace hsprior {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no, std::size_t col) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    std::ostringstream os;
    os << "non-numeric cell '" << field << "' at line " << line_no << ", column " << col + 1;
    throw DataError(os.str());
  }
  return value;
}

}  // namespace

TargetKind parse_target_kind(const std::string& name) {
  if (name == "regression") return TargetKind::regression;
  if (name == "classification") return TargetKind::classification;
  throw std::invalid_argument("target type must be 'regression' or 'classification', got '" +
                              name + "'");
}

Dataset parse_csv(std::istream& in, const std::string& target, TargetKind kind) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError("CSV input is empty");
  const auto header = split_fields(line);
  const auto target_it = std::find(header.begin(), header.end(), target);
  if (target_it == header.end()) throw DataError("target column '" + target + "' not found in header");
  const auto target_col = static_cast<std::size_t>(target_it - header.begin());

  Dataset data;
  data.kind = kind;
  data.target_name = target;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_col) data.feature_names.emplace_back(header[c]);

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << "ragged row at line " << line_no << ": expected " << header.size() << " fields, got "
         << fields.size();
      throw DataError(os.str());
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_number(fields[c], line_no, c);
      if (c == target_col) {
        if (kind == TargetKind::classification && v != 0.0 && v != 1.0) {
          std::ostringstream os;
          os << "classification target must be 0 or 1, got " << v << " at line " << line_no;
          throw DataError(os.str());
        }
        targets.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has a header but no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto D = static_cast<Eigen::Index>(header.size() - 1);
  data.X.resize(n, D);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) data.X(i, j) = rows[i][j];
    data.y(i) = targets[i];
  }
  data.constant_columns.assign(static_cast<std::size_t>(D), false);
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target, TargetKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, target, kind);
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& raw, const Standardization& s) {
  return (raw.rowwise() - s.mean.transpose()).array().rowwise() / s.sd.transpose().array();
}

Eigen::MatrixXd undo_standardization(const Eigen::MatrixXd& standardized, const Standardization& s) {
  return (standardized.array().rowwise() * s.sd.transpose().array()).rowwise() +
         s.mean.transpose().array();
}

namespace {

Standardization column_statistics(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows,
                                  std::vector<bool>& constant, const std::vector<std::string>& names) {
  detail::require(rows.size() >= 2, "standardization needs at least two training rows");
  const Eigen::Index D = X.cols();
  Standardization s{Eigen::VectorXd::Zero(D), Eigen::VectorXd::Zero(D)};
  const double m = static_cast<double>(rows.size());
  for (Eigen::Index j = 0; j < D; ++j) {
    double sum = 0.0;
    for (auto i : rows) sum += X(i, j);
    const double mean = sum / m;
    double ss = 0.0;
    for (auto i : rows) ss += (X(i, j) - mean) * (X(i, j) - mean);
    s.mean(j) = mean;
    s.sd(j) = std::sqrt(ss / (m - 1.0));
  }
  constant.assign(static_cast<std::size_t>(D), false);
  std::string bad;
  for (Eigen::Index j = 0; j < D; ++j) {
    if (!(s.sd(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j))))) {
      constant[static_cast<std::size_t>(j)] = true;
      if (!bad.empty()) bad += ", ";
      bad += j < static_cast<Eigen::Index>(names.size()) ? names[j] : std::to_string(j);
    }
  }
  if (!bad.empty()) throw DataError("constant column(s) in training data: " + bad);
  return s;
}

std::vector<std::string> default_names(Eigen::Index D) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < D; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace

Dataset split_and_standardize(const Dataset& data, double test_fraction, std::uint64_t seed) {
  detail::require(test_fraction > 0.0 && test_fraction < 1.0,
                  "split_and_standardize: test_fraction must lie in (0, 1)");
  const Eigen::Index n = data.n();
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n)));
  detail::require(n_test >= 1 && n - n_test >= 2,
                  "split_and_standardize: too few rows for the requested split");

  RngStream rng(seed, 0);
  Split split;
  if (data.kind == TargetKind::classification) {
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < n; ++i) by_class[static_cast<int>(data.y(i))].push_back(i);
    // Largest-remainder allocation of the test rows across classes.
    std::vector<std::pair<double, int>> remainders;
    std::map<int, Eigen::Index> quota;
    Eigen::Index assigned = 0;
    for (auto& [cls, rows] : by_class) {
      const double exact = test_fraction * static_cast<double>(rows.size());
      quota[cls] = static_cast<Eigen::Index>(std::floor(exact));
      assigned += quota[cls];
      remainders.emplace_back(exact - std::floor(exact), cls);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n_test && k < remainders.size(); ++k, ++assigned)
      ++quota[remainders[k].second];
    for (auto& [cls, rows] : by_class) {
      std::shuffle(rows.begin(), rows.end(), rng);
      for (std::size_t k = 0; k < rows.size(); ++k)
        (static_cast<Eigen::Index>(k) < quota[cls] ? split.test : split.train).push_back(rows[k]);
    }
  } else {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    split.test.assign(perm.begin(), perm.begin() + n_test);
    split.train.assign(perm.begin() + n_test, perm.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());

  Dataset out = data;
  const auto names = data.feature_names.empty() ? default_names(data.D()) : data.feature_names;
  out.standardization = column_statistics(data.X, split.train, out.constant_columns, names);
  out.X = apply_standardization(data.X, *out.standardization);
  out.split = std::move(split);
  return out;
}

Dataset standardize(const Dataset& data) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(data.n()));
  std::iota(all.begin(), all.end(), 0);
  Dataset out = data;
  const auto names = data.feature_names.empty() ? default_names(data.D()) : data.feature_names;
  out.standardization = column_statistics(data.X, all, out.constant_columns, names);
  out.X = apply_standardization(data.X, *out.standardization);
  out.split.reset();
  return out;
}

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.kind = data.kind;
  out.feature_names = data.feature_names;
  out.target_name = data.target_name;
  out.standardization = data.standardization;
  out.constant_columns = data.constant_columns;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), data.D());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.X.row(static_cast<Eigen::Index>(k)) = data.X.row(rows[k]);
    out.y(static_cast<Eigen::Index>(k)) = data.y(rows[k]);
  }
  return out;
}

Dataset train_part(const Dataset& data) {
  if (!data.split) throw std::invalid_argument("train_part: dataset has no split");
  return select_rows(data, data.split->train);
}

Dataset test_part(const Dataset& data) {
  if (!data.split) throw std::invalid_argument("test_part: dataset has no split");
  return select_rows(data, data.split->test);
}

SyntheticProblem generate_normal_means(long n, long p_star, double A, std::uint64_t seed) {
  detail::require(n >= 1, "generate_normal_means: n must be >= 1");
  detail::require(p_star >= 0 && p_star <= n, "generate_normal_means: need 0 <= p_star <= n");
  RngStream rng(seed, 0);
  SyntheticProblem out;
  out.beta = Eigen::VectorXd::Zero(n);
  out.beta.head(p_star).setConstant(A);
  std::shuffle(out.beta.data(), out.beta.data() + n, rng);
  out.data.X = Eigen::MatrixXd::Identity(n, n);
  out.data.y.resize(n);
  for (long i = 0; i < n; ++i) out.data.y(i) = out.beta(i) + rng.standard_normal();
  out.data.identity_design = true;
  out.data.kind = TargetKind::regression;
  out.data.feature_names = default_names(n);
  out.data.constant_columns.assign(static_cast<std::size_t>(n), false);
  return out;
}

namespace {

SyntheticProblem synthetic_design(long n, long D, long p_star, double amplitude, double rho,
                                  RngStream& rng) {
  detail::require(n >= 1 && D >= 1, "synthetic data: n and D must be >= 1");
  detail::require(p_star >= 0 && p_star <= D, "synthetic data: need 0 <= p_star <= D");
  detail::require(rho >= 0.0 && rho < 1.0, "synthetic data: rho must lie in [0, 1)");
  SyntheticProblem out;
  out.data.X.resize(n, D);
  const double a = std::sqrt(1.0 - rho), b = std::sqrt(rho);
  for (long i = 0; i < n; ++i) {
    const double shared = rng.standard_normal();
    for (long j = 0; j < D; ++j) out.data.X(i, j) = a * rng.standard_normal() + b * shared;
  }
  out.beta = Eigen::VectorXd::Zero(D);
  for (long j = 0; j < p_star; ++j) out.beta(j) = (j % 2 == 0 ? 1.0 : -1.0) * amplitude;
  out.data.feature_names = default_names(D);
  out.data.constant_columns.assign(static_cast<std::size_t>(D), false);
  return out;
}

}  // namespace

SyntheticProblem generate_linear(long n, long D, long p_star, double amplitude, double noise_sd,
                                 std::uint64_t seed, double rho) {
  RngStream rng(seed, 0);
  SyntheticProblem out = synthetic_design(n, D, p_star, amplitude, rho, rng);
  out.data.kind = TargetKind::regression;
  const Eigen::VectorXd f = out.data.X * out.beta;
  out.data.y.resize(n);
  for (long i = 0; i < n; ++i) out.data.y(i) = f(i) + noise_sd * rng.standard_normal();
  return out;
}

SyntheticProblem generate_logistic(long n, long D, long p_star, double amplitude,
                                   std::uint64_t seed, double rho) {
  RngStream rng(seed, 0);
  SyntheticProblem out = synthetic_design(n, D, p_star, amplitude, rho, rng);
  out.data.kind = TargetKind::classification;
  const Eigen::VectorXd f = out.data.X * out.beta;
  out.data.y.resize(n);
  for (long i = 0; i < n; ++i) out.data.y(i) = rng.uniform_open() < logistic(f(i)) ? 1.0 : 0.0;
  return out;
}

}  // namespace hsprior
