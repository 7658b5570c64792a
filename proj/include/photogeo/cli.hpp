#pragma once

namespace photogeo {

/// Entry point of the `photogeo` command-line tool. Returns the process exit code:
/// 0 success, 1 usage error, 2 configuration/input error, 3 divergence.
int run_cli(int argc, char** argv);

} // namespace photogeo
