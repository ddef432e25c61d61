#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bellbox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitLimits = 3;

/// Runs one verb. `args` excludes the program name. Reports go to `out`,
/// one-line error messages to `err`.
///
/// Verbs: validate, classify, membership, derive-inequality, facets, chsh,
/// quantum, threshold. Exit 0 on success, 1 on usage errors, 2 on malformed
/// or invalid input (and unmet preconditions), 3 when a size cap or the LP
/// iteration limit is hit.
///
/// BELLBOX_TOL in the environment replaces the default tolerance; --tol
/// overrides both.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bellbox::cli
