#pragma once

namespace shewave {

// Dispatches the shewave command line (synth / design / analyze / simulate /
// metrics / export) and returns the process exit code: 0 on success, 2 for
// validation errors, 3 for optimizer errors, 4 for I/O errors, 1 for usage
// errors.  The version banner goes to stderr so data on stdout stays
// deterministic.
int run_cli(int argc, const char* const* argv);

} // namespace shewave
