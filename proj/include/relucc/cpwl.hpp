#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace relucc {

/// Continuous piecewise-linear function on the real line with constant tails.
///
/// The function interpolates linearly between consecutive (breakpoint, value)
/// pairs and is constant outside the breakpoint span: f(x) = values.front()
/// for x <= breakpoints.front() and f(x) = values.back() for
/// x >= breakpoints.back().  Values are immutable after construction, so
/// instances can be shared freely across threads.
class CPwL {
public:
    /// Constructs from matching breakpoint/value sequences.  Breakpoints must
    /// be strictly increasing; throws std::invalid_argument otherwise.
    CPwL(std::vector<double> breakpoints, std::vector<double> values);

    /// The constant function with the given value (single anchor breakpoint).
    static CPwL constant(double value, double anchor = 0.0);

    /// Zero function anchored at 0.
    static CPwL zero() { return constant(0.0); }

    /// Hat with peak `peak` at the midpoint of [lo, hi], zero outside.
    static CPwL hat(double lo, double hi, double peak = 1.0);

    double operator()(double x) const { return eval(x); }
    double eval(double x) const;

    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<double>& values() const { return v_; }
    double left_tail() const { return v_.front(); }
    double right_tail() const { return v_.back(); }
    std::size_t size() const { return bp_.size(); }

    /// Smallest closed interval outside of which f is identically zero.
    /// Returns false when f == 0 everywhere; throws if a tail is nonzero
    /// (the support is then unbounded).
    bool support(double& lo, double& hi) const;

    /// True if supp(f) is contained in [lo, hi] (false on nonzero tails).
    bool is_supported_in(double lo, double hi) const;

    /// True if f >= 0 everywhere and supp(f) is contained in [lo, hi].
    bool is_nonneg_supported_in(double lo, double hi) const;

private:
    std::vector<double> bp_;
    std::vector<double> v_;
};

/// Exact pointwise linear combination sum_i coeffs[i] * fs[i].
CPwL linear_combine(const std::vector<double>& coeffs, const std::vector<CPwL>& fs);

/// x |-> f(a*x - b) for a > 0; breakpoints map through xi |-> (xi + b) / a.
CPwL dilate_shift(const CPwL& f, double a, double b);

/// Exact pointwise minimum; inserts segment crossing points as needed.
CPwL pointwise_min(const CPwL& f, const CPwL& g);

/// Exact composition x |-> outer(inner(x)).
CPwL compose(const CPwL& outer, const CPwL& inner);

/// Exact uniform distance ||f - g||_inf (attained at a breakpoint or tail).
double sup_distance(const CPwL& f, const CPwL& g);

/// ||f||_inf.
double sup_norm(const CPwL& f);

/// Decomposition of a compactly supported function into scaled unit hats on a
/// uniform grid.  Returns (coefficient, shift) pairs such that
///   g0(x) = sum_j coeff_j * hat_h(x - shift_j),
/// where hat_h is the hat of half-width `grid_step` centered at 1/2 and
/// shift_j places it at the j-th grid point.  Requires every breakpoint of g0
/// to lie on the grid and g0 to vanish outside [0, support_end]; throws
/// std::invalid_argument otherwise.  When support_end < 0 it is inferred as
/// the smallest integer >= the support's right end.
std::vector<std::pair<double, double>>
hat_decompose(const CPwL& g0, double grid_step, double support_end = -1.0);

/// Vector of unit translates g_k(x) = g(x + k - 1), k = 1..n.
struct VecFunction {
    std::vector<CPwL> components;

    /// Continuity matching g_k(1) == g_{k+1}(0) within tol.
    bool matched(double tol = 1e-12) const;
};

VecFunction vectorize(const CPwL& g, int n);

}  // namespace relucc
