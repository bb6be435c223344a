#pragma once

namespace ftme {

/// Execution policy for the data-parallel kernels. `serial` is the reference path;
/// both produce bit-identical results.
enum class Exec { serial, parallel };

/// Worker count used by Exec::parallel. Defaults to the OpenMP maximum, capped by
/// the FTME_THREADS environment variable when set.
int worker_count();

/// Overrides the worker count for subsequent parallel kernels (0 restores the default).
void set_worker_count(int workers);

}  // namespace ftme
