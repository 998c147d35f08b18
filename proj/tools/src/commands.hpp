#pragma once

#include "config.hpp"

// One function per CLI verb. Each returns the process exit code: 0 on
// success, 1 when a requested check fails numerically. Config problems throw
// ConfigError (exit 2) and oversized sequential solves throw TreeSizeError
// (exit 3); main() does that mapping.

namespace secretballot::cli {

int run_optimize(const GlobalOptions& options);
int run_verify(const GlobalOptions& options);
int run_simulate(const GlobalOptions& options);
int run_sweep(const GlobalOptions& options);

}  // namespace secretballot::cli
