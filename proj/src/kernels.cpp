#include "hsprior/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace hsprior::kernels {
namespace {

long num_shards(std::size_t n) {
  return static_cast<long>((static_cast<long>(n) + kMeffShardSize - 1) / kMeffShardSize);
}

void meff_shard(const MeffKernelArgs& args, long shard, std::span<double> meff,
                std::span<double> tau) {
  RngStream rng(args.seed, static_cast<std::uint64_t>(shard));
  const long begin = shard * kMeffShardSize;
  const long end = std::min<long>(begin + kMeffShardSize, static_cast<long>(meff.size()));
  const double root_n = std::sqrt(static_cast<double>(args.scale.n));
  for (long i = begin; i < end; ++i) {
    const double t = sample(args.tau_prior, rng);
    const double u = t * root_n / args.scale.sigma;
    double m = 0.0;
    for (long j = 0; j < args.scale.D; ++j) {
      const double ul = u * sample(args.lambda_prior, rng);
      const double ul2 = ul * ul;
      // 1 - kappa = ul2 / (1 + ul2); the limit is 1 when ul2 overflows.
      m += std::isfinite(ul2) ? ul2 / (1.0 + ul2) : 1.0;
    }
    meff[i] = m;
    tau[i] = t;
  }
}

void check_spans(std::span<double> meff, std::span<double> tau) {
  if (meff.size() != tau.size())
    throw std::invalid_argument("sample_meff: output spans differ in length");
}

}  // namespace

namespace serial {

void sample_meff(const MeffKernelArgs& args, std::span<double> meff, std::span<double> tau) {
  check_spans(meff, tau);
  const long shards = num_shards(meff.size());
  for (long s = 0; s < shards; ++s) meff_shard(args, s, meff, tau);
}

void for_each_task(long num_tasks, const std::function<void(long)>& task) {
  for (long i = 0; i < num_tasks; ++i) task(i);
}

}  // namespace serial

namespace omp {

void sample_meff(const MeffKernelArgs& args, std::span<double> meff, std::span<double> tau) {
  check_spans(meff, tau);
  const long shards = num_shards(meff.size());
#pragma omp parallel for schedule(static)
  for (long s = 0; s < shards; ++s) meff_shard(args, s, meff, tau);
}

void for_each_task(long num_tasks, const std::function<void(long)>& task) {
  std::exception_ptr first_error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < num_tasks; ++i) {
    try {
      task(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace omp
}  // namespace hsprior::kernels
