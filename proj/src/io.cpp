#include "hsprior/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "hsprior/error.hpp"

namespace hsprior::io {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("draws CSV line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

std::vector<double> as_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::filesystem::path output_directory(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "hsprior-out";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string draws_csv(const PosteriorDraws& d) {
  std::ostringstream os;
  const Eigen::Index D = d.D();
  os << "chain,iteration,divergent,intercept,tau";
  if (d.has_sigma()) os << ",sigma";
  for (Eigen::Index j = 0; j < D; ++j) os << ",beta[" << j + 1 << "]";
  for (Eigen::Index j = 0; j < D; ++j) os << ",lambda[" << j + 1 << "]";
  os << '\n';
  for (Eigen::Index s = 0; s < d.size(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    os << d.chain[i] << ',' << d.iteration[i] << ',' << static_cast<int>(d.divergent[i]) << ','
       << format_double(d.intercept(s)) << ',' << format_double(d.tau(s));
    if (d.has_sigma()) os << ',' << format_double(d.sigma(s));
    for (Eigen::Index j = 0; j < D; ++j) os << ',' << format_double(d.beta(s, j));
    for (Eigen::Index j = 0; j < D; ++j) os << ',' << format_double(d.lambda(s, j));
    os << '\n';
  }
  return os.str();
}

PosteriorDraws parse_draws_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("draws CSV is empty");
  const auto header = split_line(line);
  if (header.size() < 6 || header[0] != "chain" || header[1] != "iteration" ||
      header[2] != "divergent" || header[3] != "intercept" || header[4] != "tau")
    throw DataError("draws CSV has an unexpected header");
  const bool has_sigma = header[5] == "sigma";
  const std::size_t first_beta = has_sigma ? 6 : 5;
  if ((header.size() - first_beta) % 2 != 0 || header.size() == first_beta)
    throw DataError("draws CSV: beta and lambda columns do not pair up");
  const Eigen::Index D = static_cast<Eigen::Index>((header.size() - first_beta) / 2);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError("draws CSV line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("draws CSV has no draws");

  PosteriorDraws d;
  const Eigen::Index S = static_cast<Eigen::Index>(rows.size());
  d.likelihood = has_sigma ? LikelihoodKind::gaussian : LikelihoodKind::bernoulli_logit;
  d.beta.resize(S, D);
  d.lambda.resize(S, D);
  d.intercept.resize(S);
  d.tau.resize(S);
  if (has_sigma) d.sigma.resize(S);
  int max_chain = -1;
  for (Eigen::Index s = 0; s < S; ++s) {
    const auto& r = rows[static_cast<std::size_t>(s)];
    d.chain.push_back(static_cast<int>(r[0]));
    d.iteration.push_back(static_cast<int>(r[1]));
    d.divergent.push_back(static_cast<std::uint8_t>(r[2] != 0.0));
    d.intercept(s) = r[3];
    d.tau(s) = r[4];
    if (has_sigma) d.sigma(s) = r[5];
    for (Eigen::Index j = 0; j < D; ++j) {
      d.beta(s, j) = r[first_beta + static_cast<std::size_t>(j)];
      d.lambda(s, j) = r[first_beta + static_cast<std::size_t>(D + j)];
    }
    max_chain = std::max(max_chain, d.chain.back());
  }
  d.num_chains = max_chain + 1;
  d.draws_per_chain = d.num_chains > 0 ? static_cast<int>(S / d.num_chains) : 0;
  return d;
}

nlohmann::json to_json(const ParameterSummary& s) {
  return {{"name", s.name}, {"mean", s.mean},   {"sd", s.sd},     {"q05", s.q05},
          {"q50", s.q50},   {"q95", s.q95},     {"rhat", s.rhat}, {"ess_bulk", s.ess_bulk},
          {"ess_tail", s.ess_tail}};
}

nlohmann::json to_json(const ChainStats& s) {
  return {{"step_size", s.step_size},
          {"trajectory_length", s.trajectory_length},
          {"mean_accept", s.mean_accept},
          {"divergences", s.divergences},
          {"warmup_divergences", s.warmup_divergences},
          {"leapfrog_steps", s.leapfrog_steps}};
}

nlohmann::json to_json(const PosteriorShrinkage& s) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [p, v] : s.quantiles) q[std::to_string(static_cast<int>(std::lround(p * 100))) + "%"] = v;
  return {{"mean", s.mean}, {"quantiles", q}, {"mean_kappa", as_vector(s.mean_kappa)}};
}

nlohmann::json fit_report(const FitResult& result, const PosteriorShrinkage& shrinkage,
                          const std::optional<PredictiveSummary>& heldout, bool timings) {
  nlohmann::json j;
  j["parameters"] = nlohmann::json::array();
  for (const auto& p : result.parameters) j["parameters"].push_back(to_json(p));
  j["chains"] = nlohmann::json::array();
  for (const auto& c : result.chains) j["chains"].push_back(to_json(c));
  j["diagnostics"] = {{"max_rhat", result.max_rhat},
                      {"min_ess_bulk", result.min_ess_bulk},
                      {"divergences", result.divergences}};
  j["m_eff"] = to_json(shrinkage);
  if (heldout) j["heldout"] = {{"mlpd", heldout->mlpd}, {"mse", heldout->mse}};
  if (timings) j["wall_seconds"] = result.wall_seconds;
  return j;
}

std::string vanderpas_records_csv(const VanderpasResult& result, bool timings) {
  std::ostringstream os;
  os << "prior,p_star,A,replication,ok,mse,posterior_mean_meff,max_rhat,divergences,error";
  if (timings) os << ",wall_seconds";
  os << '\n';
  for (const auto& r : result.records) {
    os << r.prior << ',' << r.p_star << ',' << format_double(r.amplitude) << ',' << r.replication
       << ',' << (r.ok ? 1 : 0) << ',' << format_double(r.mse) << ','
       << format_double(r.posterior_mean_meff) << ',' << format_double(r.max_rhat) << ','
       << r.divergences << ',' << quoted(r.error);
    if (timings) os << ',' << format_double(r.wall_seconds);
    os << '\n';
  }
  return os.str();
}

std::string vanderpas_cells_csv(const VanderpasResult& result) {
  std::ostringstream os;
  os << "prior,p_star,A,mean_mse,se_mse,completed,failed\n";
  for (const auto& c : result.cells)
    os << c.prior << ',' << c.p_star << ',' << format_double(c.amplitude) << ','
       << format_double(c.mean_mse) << ',' << format_double(c.se_mse) << ',' << c.completed << ','
       << c.failed << '\n';
  return os.str();
}

std::string sweep_records_csv(const ExperimentResult& result, bool timings) {
  std::ostringstream os;
  os << "prior,p0,split,ok,posterior_mean_meff,mlpd,mse,max_rhat,divergences,error";
  if (timings) os << ",wall_seconds";
  os << '\n';
  for (const auto& r : result.records) {
    os << r.prior << ',' << format_double(r.p0) << ',' << r.split << ',' << (r.ok ? 1 : 0) << ','
       << format_double(r.posterior_mean_meff) << ',' << format_double(r.mlpd) << ','
       << format_double(r.mse) << ',' << format_double(r.max_rhat) << ',' << r.divergences
       << ',' << quoted(r.error);
    if (timings) os << ',' << format_double(r.wall_seconds);
    os << '\n';
  }
  return os.str();
}

std::string sweep_rows_csv(const ExperimentResult& result, bool timings) {
  std::ostringstream os;
  os << "prior,p0,mean_meff,mlpd,mlpd_se,mse,divergences,completed,failed";
  if (timings) os << ",wall_seconds";
  os << '\n';
  for (const auto& r : result.rows) {
    os << r.prior << ',' << format_double(r.p0) << ',' << format_double(r.mean_meff) << ','
       << format_double(r.mlpd) << ',' << format_double(r.mlpd_se) << ',' << format_double(r.mse)
       << ',' << r.divergences << ',' << r.completed << ',' << r.failed;
    if (timings) os << ',' << format_double(r.wall_seconds);
    os << '\n';
  }
  return os.str();
}

nlohmann::json manifest(const std::string& command, const nlohmann::json& config,
                        std::uint64_t seed, std::optional<double> wall_seconds) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["versions"] = {{"hsprior", HSPRIOR_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  if (wall_seconds) j["wall_seconds"] = *wall_seconds;
  return j;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace hsprior::io
