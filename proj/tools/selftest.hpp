#ifndef AICAU_TOOLS_SELFTEST_HPP
#define AICAU_TOOLS_SELFTEST_HPP

#include <ostream>

namespace aicau::tools {

/// Runs the mathematical identity checks; prints one line per check and
/// returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace aicau::tools

#endif  // AICAU_TOOLS_SELFTEST_HPP
