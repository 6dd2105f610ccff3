#include "klx/trace.hpp"

#include <fstream>
#include <stdexcept>

#include "klx/io_util.hpp"

namespace klx {

void write_trace_csv(std::ostream& os, const IterateTrace& trace, double f_star) {
  os << "iter,value,gap,residual,step\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << k << "," << num17(trace.values[k]) << ","
       << num17(trace.values[k] - f_star) << "," << num17(trace.residuals[k])
       << "," << num17(trace.steps[k]) << "\n";
  }
}

void write_trace_csv(const std::string& path, const IterateTrace& trace,
                     double f_star) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trace_csv: cannot open " + path);
  write_trace_csv(os, trace, f_star);
}

}  // namespace klx
