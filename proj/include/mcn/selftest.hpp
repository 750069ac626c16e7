#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcn {

/// Outcome of one acceptance-criterion sweep.
struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // instance counts, worst deviations, first mismatch
};

int criterion_count();

/// Runs one acceptance criterion (1..criterion_count()). The seed fixes
/// every random draw, so repeated runs are bit-identical.
CriterionResult run_criterion(int index, std::uint32_t seed = 1u);

/// Runs all criteria, or only the requested one. When `report` is set it is
/// called once per criterion as results arrive.
std::vector<CriterionResult> run_selftest(
    std::optional<int> only = std::nullopt, std::uint32_t seed = 1u,
    const std::function<void(const CriterionResult&)>& report = {});

}  // namespace mcn
