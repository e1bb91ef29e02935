#pragma once

namespace affine {

// Entry point of the command line tool; also callable in-process.  Exit
// codes: 0 success, 1 a check or simulation failed, 2 configuration error.
int run(int argc, const char* const* argv);

}  // namespace affine
