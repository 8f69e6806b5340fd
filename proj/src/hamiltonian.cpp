#include "pdm/hamiltonian.hpp"

#include <fmt/format.h>

namespace pdm {

void write_operator(std::ostream& os, const TridiagonalOperatord& op) {
  const Index n = op.size();
  for (Index j = 0; j < n; ++j) {
    if (j + 1 < n)
      os << fmt::format("{},{:.17g},{:.17g}\n", j + 1, op.diag()[j], op.off()[j]);
    else
      os << fmt::format("{},{:.17g},\n", j + 1, op.diag()[j]);
  }
}

}  // namespace pdm
