#include "bornlab/analytic_checks.hpp"

#include "bornlab/util.hpp"

namespace bornlab::analytic_checks {

using util::compute_error;

std::string CheckReport::serialize() const {
  throw compute_error("unimplemented");
}
CheckReport parse_report(const std::string&) {
  throw compute_error("unimplemented");
}
CheckReport measure_interchange_check(const integrand2n&, int, uint64_t,
                                      uint64_t) {
  throw compute_error("unimplemented");
}
std::vector<CheckReport> support_bound_check(const potentials::PotentialSpec&,
                                             const Grid&) {
  throw compute_error("unimplemented");
}
CheckReport farfield_decay_check(const potentials::PotentialSpec&, const Grid&,
                                 double, const double*,
                                 const std::vector<double>&) {
  throw compute_error("unimplemented");
}
std::vector<CheckReport> run_default_checks(uint64_t, int) {
  throw compute_error("unimplemented");
}
std::string reports_csv(const std::vector<CheckReport>&) {
  throw compute_error("unimplemented");
}

}  // namespace bornlab::analytic_checks
