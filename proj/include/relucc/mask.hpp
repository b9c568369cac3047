#pragma once

#include <string>
#include <vector>

#include "relucc/matrix.hpp"

namespace relucc {

/// Refinement mask: the coefficients c_0..c_N of the two-scale relation
/// phi(x) = sum_j c_j phi(2x - j).  Requires N >= 1 and c_0, c_N != 0 so
/// that N is the true support length.
struct Mask {
    std::vector<double> coefficients;
    std::string name;

    Mask(std::vector<double> coeffs, std::string label = "");

    int support_end() const { return static_cast<int>(coefficients.size()) - 1; }  // N
    double coeff(long j) const {
        return (j < 0 || j >= static_cast<long>(coefficients.size()))
                   ? 0.0
                   : coefficients[static_cast<std::size_t>(j)];
    }
};

/// The pair of N x N transfer matrices driving the vectorized cascade:
/// T0[i][j] = c_{2i-j-1}, T1[i][j] = c_{2i-j} (indices 1-based, missing
/// coefficients zero).
struct TransferPair {
    Matrix T0;
    Matrix T1;
};

TransferPair transfer_matrices(const Mask& mask);

struct SumRules {
    double total;  // sum c_j
    double even;   // sum c_{2j}
    double odd;    // sum c_{2j+1}
};

SumRules sum_rules(const Mask& mask);

/// Catalog of classical masks: "haar", "hat", "bspline3", "d4".
/// Throws std::invalid_argument for unknown names.
Mask builtin_mask(const std::string& name);

}  // namespace relucc
