#pragma once

// Subcommand dispatch for the rtlab executable.
//
//   growth-rate      --config F [--oracle] [--out D]
//   linear-evolve    --config F --tmax T --dt DT [--out D]
//   nonlinear-evolve --config F --delta D --tmax T [--dt DT] [--snapshot-every N] [--out D]
//   sweep            --config F --experiment {error-scaling|escape-time|headline} [--out D]
//   oracle-check     --config F [--out D]
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure.

#include <ostream>
#include <string>
#include <vector>

namespace rtlab {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 1;
inline constexpr int exit_numerical = 2;

/// args excludes the program name. Reports go to out, diagnostics and usage to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtlab
