#pragma once

#include <iosfwd>

namespace parahom {

/// Command-line entry point. Exit status: 0 when every experiment passes,
/// 1 when a verdict fails or an experiment errors, 2 on usage or config errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parahom
