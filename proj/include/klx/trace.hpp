#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace klx {

/// Per-iteration record emitted by every solver. All columns have equal
/// length; values are non-increasing for proximal gradient with a step
/// below 1/L.
struct IterateTrace {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;
  std::vector<double> residuals;
  std::vector<double> steps;
  std::string termination;  ///< "tol" | "max_iter" | solver-specific flags

  std::size_t size() const { return values.size(); }
};

/// CSV columns: iter,value,gap,residual,step (gap relative to f_star).
void write_trace_csv(std::ostream& os, const IterateTrace& trace, double f_star);
void write_trace_csv(const std::string& path, const IterateTrace& trace, double f_star);

}  // namespace klx
