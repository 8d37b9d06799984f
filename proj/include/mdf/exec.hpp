#pragma once

namespace mdf {

// Execution mode for data-parallel kernels. Every parallel kernel assigns each
// output element to exactly one thread with a serial inner reduction, so
// serial and parallel results are bit-identical.
enum class Exec { serial, parallel };

// Worker count for parallel kernels: OpenMP's default, capped by the
// MDF_THREADS environment variable when set.
int max_threads();

}  // namespace mdf
