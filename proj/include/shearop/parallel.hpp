#pragma once

namespace shearop {

/// Applies the SHEAROP_THREADS cap (if set) and disables nested parallel
/// regions. Idempotent; called by the CLI and test mains.
void init_threads();

/// Number of threads an outer `parallel for` will use.
int max_threads();

}  // namespace shearop
