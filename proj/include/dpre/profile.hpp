#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpre/partition.hpp"

namespace dpre {

/// Per-step inverse temperatures beta_1, ..., beta_N. Step i contributes
/// beta_i * g(i, sigma_i) to the Hamiltonian.
class BetaProfile {
 public:
  explicit BetaProfile(std::vector<double> per_step) : steps_(std::move(per_step)) {
    for (std::size_t i = 0; i < steps_.size(); ++i)
      if (!std::isfinite(steps_[i]) || steps_[i] < 0)
        throw std::invalid_argument("BetaProfile: entry " + std::to_string(i + 1) +
                                    " is negative or not finite");
  }

  static BetaProfile constant(int length, double beta) {
    return BetaProfile(std::vector<double>(static_cast<std::size_t>(length), beta));
  }

  /// beta_l on block l of the partition.
  static BetaProfile blocks(const PartitionScheme& p, const std::vector<double>& betas) {
    if (static_cast<int>(betas.size()) != p.blocks())
      throw std::invalid_argument("BetaProfile::blocks: need one temperature per block");
    std::vector<double> steps(static_cast<std::size_t>(p.length()));
    for (int l = 1; l <= p.blocks(); ++l)
      for (int i = p.first(l); i <= p.last(l); ++i)
        steps[static_cast<std::size_t>(i - 1)] = betas[static_cast<std::size_t>(l - 1)];
    return BetaProfile(std::move(steps));
  }

  /// beta everywhere except on block l, where the Hamiltonian is switched off.
  static BetaProfile excluding_block(const PartitionScheme& p, int block, double beta) {
    if (block < 1 || block > p.blocks())
      throw std::invalid_argument("BetaProfile::excluding_block: block index out of range");
    auto prof = constant(p.length(), beta);
    for (int i = p.first(block); i <= p.last(block); ++i) prof.steps_[static_cast<std::size_t>(i - 1)] = 0.0;
    return prof;
  }

  int length() const { return static_cast<int>(steps_.size()); }

  /// beta at step i, 1 <= i <= N.
  double at(int step) const { return steps_[static_cast<std::size_t>(step - 1)]; }
  const std::vector<double>& values() const { return steps_; }

  bool is_zero() const {
    for (double b : steps_)
      if (b != 0.0) return false;
    return true;
  }

 private:
  std::vector<double> steps_;
};

}  // namespace dpre
