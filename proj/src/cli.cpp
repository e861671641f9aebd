#include "bornlab/cli.hpp"

#include "bornlab/util.hpp"

namespace bornlab::cli {

using util::compute_error;

std::string ExperimentConfig::serialize() const {
  throw compute_error("unimplemented");
}
uint64_t ExperimentConfig::hash() const {
  throw compute_error("unimplemented");
}
ExperimentConfig parse_config_text(const std::string&) {
  throw compute_error("unimplemented");
}
ExperimentConfig load_config(const std::string&) {
  throw compute_error("unimplemented");
}
int run(int, const char* const*) {
  throw compute_error("unimplemented");
}

}  // namespace bornlab::cli
