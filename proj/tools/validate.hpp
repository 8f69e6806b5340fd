#pragma once

// Self-check suite behind `pdmchain validate`.

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "pdm/hamiltonian.hpp"

namespace pdm::cli {

/// Source of the full operator under test. Swappable so a deliberately
/// broken builder can be fed through the same checks.
using OperatorBuilder = std::function<TridiagonalOperatord(const ChainSpec&)>;

OperatorBuilder default_builder();

struct CheckResult {
  std::string name;
  int cases = 0;
  double worst = 0;      // largest error seen
  double tolerance = 0;
  bool pass = false;
};

/// Random instances used by the oracle checks (N <= 12, gamma in [0, 2],
/// both variants), fully determined by `seed`.
std::vector<ChainSpec> validation_instances(std::uint64_t seed, int count = 40);

std::vector<CheckResult> run_validation(std::uint64_t seed,
                                        const OperatorBuilder& builder = default_builder());

bool all_passed(const std::vector<CheckResult>& results);

void print_validation(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace pdm::cli
