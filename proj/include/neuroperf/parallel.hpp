#pragma once

namespace neuroperf {

// Serial runs the reference loops; Parallel runs the same loop bodies under OpenMP. Both
// produce bitwise-identical results because every output entry is written by exactly one
// iteration in a fixed order.
enum class Execution { Serial, Parallel };

int max_threads();
void set_max_threads(int n);

// Reads NEUROPERF_THREADS; a positive integer caps the OpenMP worker count.
void apply_thread_env();

}  // namespace neuroperf
