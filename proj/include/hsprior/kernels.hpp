#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "hsprior/distributions.hpp"
#include "hsprior/shrinkage_math.hpp"

namespace hsprior {

/// Selects the serial reference path or the OpenMP path of a kernel. Both
/// paths produce bit-identical results; work is split into fixed shards with
/// one RngStream per shard, independent of the thread count.
enum class Execution { serial, parallel };

namespace kernels {

/// Draws per shard in the m_eff prior sampler; stream id = shard index.
inline constexpr long kMeffShardSize = 4096;

struct MeffKernelArgs {
  HyperpriorSpec tau_prior;  // already coupled to sigma if applicable
  HyperpriorSpec lambda_prior;
  DesignScale scale;
  std::uint64_t seed = 0;
};

namespace serial {
void sample_meff(const MeffKernelArgs& args, std::span<double> meff, std::span<double> tau);
void for_each_task(long num_tasks, const std::function<void(long)>& task);
}  // namespace serial

namespace omp {
void sample_meff(const MeffKernelArgs& args, std::span<double> meff, std::span<double> tau);
/// Runs independent tasks with dynamic scheduling. Tasks must write only
/// to their own output slots.
void for_each_task(long num_tasks, const std::function<void(long)>& task);
}  // namespace omp

inline void sample_meff(Execution exec, const MeffKernelArgs& args, std::span<double> meff,
                        std::span<double> tau) {
  if (exec == Execution::serial)
    serial::sample_meff(args, meff, tau);
  else
    omp::sample_meff(args, meff, tau);
}

inline void for_each_task(Execution exec, long num_tasks, const std::function<void(long)>& task) {
  if (exec == Execution::serial)
    serial::for_each_task(num_tasks, task);
  else
    omp::for_each_task(num_tasks, task);
}

}  // namespace kernels
}  // namespace hsprior
