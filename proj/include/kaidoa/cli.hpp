#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace kaidoa {

/// Entry point behind the kaidoa binary. args excludes the program name.
/// Returns 0 on success, 1 on configuration/usage errors, 2 on runtime
/// failures.
int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace kaidoa
