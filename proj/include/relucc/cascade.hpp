#pragma once

#include <vector>

#include "relucc/cpwl.hpp"
#include "relucc/mask.hpp"

namespace relucc {

/// One application of the refinement operator, Vg(x) = sum_j c_j g(2x - j),
/// computed exactly at the breakpoint level.
CPwL apply_V(const Mask& mask, const CPwL& g);

/// n-fold application V^n g; n = 0 returns g unchanged.
CPwL apply_Vn(const Mask& mask, const CPwL& g, int n);

/// Binary digits of x in [0, 1] extracted with the quantizer Q = chi_[1/2,1]
/// (so the digit at exactly 1/2 is 1) together with the residual chain
/// R_j = 2 R_{j-1} - B_j, R_0 = x.
struct BitTrace {
    double x = 0.0;
    std::vector<int> bits;          // B_1..B_n
    std::vector<double> residuals;  // R_1..R_n

    /// x == sum_k B_k 2^{-k} + 2^{-n} R_n, evaluated in double precision.
    double reconstruction() const;
};

BitTrace bit_trace(double x, int n);

/// The doubling residual map extended to the whole line:
/// R(x) = 0 for x <= 0, 1 for x >= 1, else 2x - [x >= 1/2].
double residual_step(double x);

/// n-fold iterate R^n(x); equals 2^n x - k on [k 2^-n, (k+1) 2^-n) inside
/// [0, 1].
double residual(double x, int n);

/// Matrix-product evaluation of Vec(V^n g)(x) for g supported on [0, N]:
/// G_n(x) = T_{B_1(x)} ... T_{B_n(x)} G(R^n(x)).
std::vector<double> cascade_Gn(const Mask& mask, const CPwL& g, double x, int n);

struct FixedPointRecord {
    int n;
    double increment;  // ||V^{n+1} phi0 - V^n phi0||_inf, exact
};

struct FixedPointRun {
    std::vector<FixedPointRecord> records;
    double fitted_lambda = 0.0;  // 0 when too few usable increments
};

/// Successive exact sup-norm increments of the cascade iteration, with a
/// geometric rate fitted by least squares on the log increments (entries
/// below 1e-13 are treated as float noise and excluded from the fit).
FixedPointRun fixed_point_iterate(const Mask& mask, const CPwL& phi0, int n_max);

/// Least-squares exponent fit y_i ~ C * lambda^{x_i} on the points with
/// y > floor; returns 0 when fewer than two usable points remain.
double fit_geometric_rate(const std::vector<double>& ns, const std::vector<double>& ys,
                          double floor = 1e-13);

}  // namespace relucc
