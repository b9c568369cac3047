#pragma once

#include <utility>
#include <vector>

#include "relucc/cascade.hpp"
#include "relucc/cpwl.hpp"
#include "relucc/mask.hpp"
#include "relucc/relu_net.hpp"

namespace relucc {

/// Parameter schedule for the smoothed building blocks at iteration count n.
/// alpha1/beta1 and alpha2/beta2 drive the two smoothed residuals forming the
/// min pair; alpha_mat/beta_mat the residual used inside the matrix stage;
/// delta0 the smoothed-indicator half-width; M the product-gadget bound.
/// All entries except M are dyadic so the resulting network weights are exact
/// powers of two (or dyadic rationals) in binary floating point.
struct GadgetParams {
    int n = 0;
    double alpha1 = 0, beta1 = 0;
    double alpha2 = 0, beta2 = 0;
    double delta0 = 0;
    double alpha_mat = 0, beta_mat = 0;
    double M = 0;

    /// Throws std::invalid_argument when any constraint fails:
    ///   7/16 < alpha1 < beta1 < alpha2 < beta2 < 1/2,
    ///   1/2 - alpha1 < 2^{-n-3},
    ///   1/2 - alpha2 < (1/2 - beta1) 2^{-n+1},
    ///   delta0 == 2^{-n-3},
    ///   7/16 < alpha_mat < beta_mat < 1/2, 1/2 - alpha_mat < 2^{-n-3},
    ///   M > 0.
    void validate() const;
};

/// The dyadic schedule
///   alpha1 = 1/2 - 2^{-n-4}, beta1 = 1/2 - 2^{-n-5},
///   alpha2 = 1/2 - 2^{-2n-5}, beta2 = 1/2 - 2^{-2n-6},
///   delta0 = 2^{-n-3},      alpha_mat/beta_mat = alpha1/beta1,
/// with M = ||g||_inf * max(1, B)^n, B the larger infinity operator norm of
/// T0^T and T1^T.  Throws for n = 0 (the 7/16 bound fails) and when the
/// dyadic gaps degenerate in double precision.
GadgetParams default_params(int n, const Mask& mask, const CPwL& g);

/// A CPwL function paired with a network computing it exactly.
struct GadgetPair {
    CPwL fn;
    ReluNet net;
};

/// Smoothed residual with breakpoints {0, alpha, beta, 1/2, 1}: equal to the
/// doubling map outside [alpha, 1/2], ramping down to 0 on [alpha, beta] and
/// flat zero on [beta, 1/2].  Requires 7/16 < alpha < beta < 1/2.
GadgetPair smoothed_residual(double alpha, double beta);

/// The pair of smoothed indicator surrogates for chi_[0,1/2) and chi_[1/2,1]:
///   lo(x) = 1 - (x - 1/2)_+ / d0 + (x - 1/2 - d0)_+ / d0,
///   hi(x) =     (x - 1/2 + d0)_+ / d0 - (x - 1/2)_+ / d0,
/// exact indicators outside [1/2 - d0, 1/2 + d0].
struct IndicatorPair {
    CPwL lo_fn, hi_fn;
    ReluNet lo_net, hi_net;
};

IndicatorPair smoothed_indicators(double delta0);

/// Product surrogate Pi(x, y) = -relu(M x e - y) - relu(M (1-x) e - relu(-y))
/// + M e mapping R x R^N -> R^N with width 2N+1 and two hidden layers.
/// Matches x * y whenever x in {0,1} (|y_i| <= M) or y = 0 (x in [0,1]).
ReluNet product_gadget(int N, double M);

/// Reference evaluation of the same formula without building layers.
std::vector<double> product_formula(double M, double x, const std::vector<double>& y);

/// Exact min on R^2 via min{x, y} = y_+ - (-y)_+ - (y - x)_+.
ReluNet min_gadget();

/// Saturating ramp r_k: 0 below k-1, x-k+1 on [k-1, k], 1 above k.
GadgetPair ramp(int k);

/// The unit hat with breakpoints {3/8, 1/2, 5/8} and peak 1; the canonical
/// special seed (m = 3 breakpoints).
GadgetPair special_hat();

/// Non-negative with support inside [1/8, 7/8].
bool is_special(const CPwL& g);

/// The union of buffers around the dyadic grid points where g(R^n(.))
/// vanishes for special g: [0,1] ^ U_j [j 2^-n - 2^-n-3, j 2^-n + 2^-n-3].
std::vector<std::pair<double, double>> lambda_intervals(int n);

/// Membership in Omega_n = [0,1] \ U_{j<=n} E_j for E_j the width-
/// (2 delta 2^-j) buffers left of the dyadic points at scale j.
bool in_omega(double x, int n, double delta);

}  // namespace relucc
