#pragma once

#include <ostream>
#include <string>

#include "edgeloc/conic.hpp"

namespace edgeloc {

// Writes the program in SDPA sparse format (.dat-s) as the linear matrix
// inequality  X(y) = sum_k y_k F_k - F0 >= 0  over one block per cone:
// the zero cone becomes a diagonal block of paired +/- rows, the nonnegative
// cone one diagonal block, and each PSD block a dense block (svec scaling
// divided out). Entry ordering is deterministic: matrices in index order,
// blocks ascending, upper-triangle entries by (row, column).
void write_sdpa(const ConicProgram& prog, std::ostream& os);
void write_sdpa(const ConicProgram& prog, const std::string& path);

}  // namespace edgeloc
