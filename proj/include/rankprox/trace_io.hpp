#pragma once

// JSON-lines persistence of solver traces and an independent checker of the
// descent guarantees recorded in them.

#include "rankprox/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rankprox {

/// One JSON object per record; test_rmse is null when no monitor ran.
void write_trace(std::ostream& out, const SolverTrace& trace);
void write_trace(const std::string& path, const SolverTrace& trace);
SolverTrace read_trace(std::istream& in);
SolverTrace read_trace(const std::string& path);

struct TraceCheck {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t outer_checked = 0;
  std::size_t inner_checked = 0;
};

/// Checks that
///  - psi never increases from one record to the next,
///  - every outer record satisfies psi_t <= psi_{t-1} - beta xi_norm^2 / L,
///    with psi_{t-1} from the previous outer (or init) record,
///  - wall_time is non-decreasing.
/// `rel_tol` absorbs floating-point noise, relative to max(1, |psi|).
TraceCheck validate_trace(const SolverTrace& trace, double beta, double rel_tol = 1e-10);

}  // namespace rankprox
