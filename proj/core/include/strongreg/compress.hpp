#pragma once

#include <vector>

#include "strongreg/solvers.hpp"

namespace strongreg {

// Keeps the ceil(d * keep_fraction) largest-magnitude entries of every column; ties go to the
// lower index.
WeightMatrix sparsify(const WeightMatrix& W, double keep_fraction);

// Entrywise sign with sign(0) = 0.
WeightMatrix one_bit(const WeightMatrix& W);

// Per column, the fraction of entries with |w_i| >= (1 - rel_tol) ||w||∞. Throws ZeroColumn.
std::vector<double> boundary_fraction(const WeightMatrix& W, double rel_tol = 1e-6);

// Per column, the fraction of nonzero entries.
std::vector<double> nonzero_fraction(const WeightMatrix& W);

}  // namespace strongreg
