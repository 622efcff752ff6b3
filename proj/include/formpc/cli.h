#pragma once

#include <iosfwd>

namespace formpc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kViolations = 2 };

/// Entry point behind the `formpc` executable:
///   run <scenario> [--out DIR] [--mode centralized|decentralized]
///       [--duration S] [--plot] [--quiet]
///   validate <scenario>
///   plot <csv> [--out DIR]
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace formpc::cli
