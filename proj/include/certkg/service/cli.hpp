#pragma once

#include <iosfwd>

namespace certkg::service {

// Exit codes: 0 success, 1 a check failed (verify-audit), 2 usage or runtime
// error. Errors print one JSON line {"error": code, "message": ...} to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace certkg::service
