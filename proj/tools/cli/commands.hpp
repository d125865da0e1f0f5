#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace lissnas::cli {

/// Full command line without the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_gen_synthetic(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_shrink(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_analyze_locality(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace lissnas::cli
