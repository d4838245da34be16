#pragma once

namespace resopt {

/// Execution mode of the data-parallel kernels. Serial is the reference
/// implementation; Parallel runs the same per-unit work under OpenMP with
/// per-unit RNG streams and ordered reductions, so both modes produce
/// bit-identical results.
enum class ExecMode { Serial, Parallel };

/// Cap the OpenMP worker count (CLI --threads). 0 leaves the runtime default.
void set_thread_cap(int n);
int thread_cap();

}  // namespace resopt
