#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmx::cli {

/// Exit codes: 0 ok, 2 validation / observation / budget errors, 3 numerical
/// degeneracy (not solvable, degenerate closure, ...), 4 I/O or parse errors.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count from PMX_THREADS (unset or 0 means hardware concurrency).
unsigned worker_count();

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_digest(const std::string& path);

}  // namespace pmx::cli
