#include "relucc/mask.hpp"

#include <cmath>
#include <stdexcept>

namespace relucc {

Mask::Mask(std::vector<double> coeffs, std::string label)
    : coefficients(std::move(coeffs)), name(std::move(label)) {
    if (coefficients.size() < 2)
        throw std::invalid_argument("Mask: need at least two coefficients");
    if (coefficients.front() == 0.0 || coefficients.back() == 0.0)
        throw std::invalid_argument("Mask: c_0 and c_N must be nonzero");
}

TransferPair transfer_matrices(const Mask& mask) {
    std::size_t n = static_cast<std::size_t>(mask.support_end());
    TransferPair t{Matrix(n, n), Matrix(n, n)};
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            t.T0(i - 1, j - 1) = mask.coeff(2 * static_cast<long>(i) - static_cast<long>(j) - 1);
            t.T1(i - 1, j - 1) = mask.coeff(2 * static_cast<long>(i) - static_cast<long>(j));
        }
    }
    return t;
}

SumRules sum_rules(const Mask& mask) {
    SumRules s{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < mask.coefficients.size(); ++j) {
        s.total += mask.coefficients[j];
        (j % 2 == 0 ? s.even : s.odd) += mask.coefficients[j];
    }
    return s;
}

Mask builtin_mask(const std::string& name) {
    if (name == "haar") return Mask({1.0, 1.0}, "haar");
    if (name == "hat") return Mask({0.5, 1.0, 0.5}, "hat");
    if (name == "bspline3") return Mask({0.25, 0.75, 0.75, 0.25}, "bspline3");
    if (name == "d4") {
        double s3 = std::sqrt(3.0);
        return Mask({(1.0 + s3) / 4.0, (3.0 + s3) / 4.0, (3.0 - s3) / 4.0, (1.0 - s3) / 4.0},
                    "d4");
    }
    throw std::invalid_argument("builtin_mask: unknown mask '" + name + "'");
}

}  // namespace relucc
