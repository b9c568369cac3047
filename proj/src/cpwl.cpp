#include "relucc/cpwl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relucc {

namespace {

// Abscissae closer than this are treated as the same breakpoint.
constexpr double kMergeEps = 1e-12;
// Values at merged abscissae must agree to within this.
constexpr double kMergeValueTol = 1e-9;
// Segments whose slopes differ by less than this do not cross.
constexpr double kParallelEps = 1e-12;

}  // namespace

CPwL::CPwL(std::vector<double> breakpoints, std::vector<double> values)
    : bp_(std::move(breakpoints)), v_(std::move(values)) {
    if (bp_.empty() || bp_.size() != v_.size())
        throw std::invalid_argument("CPwL: breakpoints/values size mismatch or empty");
    for (std::size_t i = 1; i < bp_.size(); ++i)
        if (!(bp_[i] > bp_[i - 1]))
            throw std::invalid_argument("CPwL: breakpoints must be strictly increasing");
    for (double x : bp_)
        if (!std::isfinite(x)) throw std::invalid_argument("CPwL: non-finite breakpoint");
}

CPwL CPwL::constant(double value, double anchor) {
    return CPwL({anchor}, {value});
}

CPwL CPwL::hat(double lo, double hi, double peak) {
    if (!(lo < hi)) throw std::invalid_argument("CPwL::hat: empty interval");
    double mid = lo + (hi - lo) / 2;
    return CPwL({lo, mid, hi}, {0.0, peak, 0.0});
}

double CPwL::eval(double x) const {
    if (x <= bp_.front()) return v_.front();
    if (x >= bp_.back()) return v_.back();
    // First breakpoint strictly greater than x.
    auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - bp_.begin()) - 1;
    double t = (x - bp_[i]) / (bp_[i + 1] - bp_[i]);
    return v_[i] + t * (v_[i + 1] - v_[i]);
}

bool CPwL::support(double& lo, double& hi) const {
    if (v_.front() != 0.0 || v_.back() != 0.0)
        throw std::invalid_argument("CPwL::support: nonzero tail, support unbounded");
    std::size_t first = bp_.size(), last = 0;
    for (std::size_t i = 0; i < bp_.size(); ++i) {
        if (v_[i] != 0.0) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (first == bp_.size()) return false;  // identically zero
    // The function is nonzero somewhere in (bp[first-1], bp[last+1]).
    lo = bp_[first > 0 ? first - 1 : 0];
    hi = bp_[last + 1 < bp_.size() ? last + 1 : bp_.size() - 1];
    return true;
}

bool CPwL::is_supported_in(double lo, double hi) const {
    if (v_.front() != 0.0 || v_.back() != 0.0) return false;
    double slo, shi;
    if (!support(slo, shi)) return true;
    return slo >= lo - kMergeEps && shi <= hi + kMergeEps;
}

bool CPwL::is_nonneg_supported_in(double lo, double hi) const {
    for (double y : v_)
        if (y < 0.0) return false;
    return is_supported_in(lo, hi);
}

namespace {

// Merge near-duplicate abscissae of a sorted point set.  When a point is
// dropped, the merged function's values at the kept and dropped abscissae
// must agree; `value_at` evaluates the function under construction.
template <typename ValueFn>
std::vector<double> dedupe_sorted(std::vector<double> xs, ValueFn&& value_at) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (out.empty() || x - out.back() > kMergeEps) {
            out.push_back(x);
        } else if (std::abs(value_at(x) - value_at(out.back())) > kMergeValueTol) {
            throw std::logic_error("CPwL merge: conflicting values at coincident breakpoints");
        }
    }
    return out;
}

template <typename ValueFn>
std::vector<double> merged_breakpoints(const std::vector<CPwL>& fs, ValueFn&& value_at) {
    std::vector<double> xs;
    for (const auto& f : fs)
        xs.insert(xs.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(xs.begin(), xs.end());
    return dedupe_sorted(std::move(xs), std::forward<ValueFn>(value_at));
}

}  // namespace

CPwL linear_combine(const std::vector<double>& coeffs, const std::vector<CPwL>& fs) {
    if (coeffs.empty() || coeffs.size() != fs.size())
        throw std::invalid_argument("linear_combine: coeffs/functions size mismatch or empty");
    auto combined = [&](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < fs.size(); ++k) s += coeffs[k] * fs[k].eval(x);
        return s;
    };
    std::vector<double> xs = merged_breakpoints(fs, combined);
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = combined(xs[i]);
    return CPwL(std::move(xs), std::move(vals));
}

CPwL dilate_shift(const CPwL& f, double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("dilate_shift: dilation factor must be positive");
    std::vector<double> xs(f.size()), vals(f.values());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (f.breakpoints()[i] + b) / a;
    return CPwL(std::move(xs), std::move(vals));
}

CPwL pointwise_min(const CPwL& f, const CPwL& g) {
    auto combined = [&](double x) { return std::min(f.eval(x), g.eval(x)); };
    std::vector<double> xs = merged_breakpoints({f, g}, combined);
    // Insert crossing points interior to shared segments.
    std::vector<double> grid;
    grid.reserve(xs.size() * 2);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        grid.push_back(xs[i]);
        double x0 = xs[i], x1 = xs[i + 1];
        double d0 = f.eval(x0) - g.eval(x0);
        double d1 = f.eval(x1) - g.eval(x1);
        double slope = (d1 - d0) / (x1 - x0);
        if (std::abs(slope) < kParallelEps) continue;
        if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
            double xc = x0 - d0 / slope;
            if (xc - x0 > kMergeEps && x1 - xc > kMergeEps) grid.push_back(xc);
        }
    }
    grid.push_back(xs.back());
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = std::min(f.eval(grid[i]), g.eval(grid[i]));
    return CPwL(std::move(grid), std::move(vals));
}

CPwL compose(const CPwL& outer, const CPwL& inner) {
    // Within each affine segment of `inner` (tails included) the composition is
    // piecewise linear with breakpoints at preimages of outer's breakpoints.
    const auto& ib = inner.breakpoints();
    std::vector<double> xs(ib);
    for (std::size_t i = 0; i + 1 < ib.size(); ++i) {
        double x0 = ib[i], x1 = ib[i + 1];
        double y0 = inner.values()[i], y1 = inner.values()[i + 1];
        double slope = (y1 - y0) / (x1 - x0);
        if (std::abs(slope) < kParallelEps) continue;
        for (double eta : outer.breakpoints()) {
            double xc = x0 + (eta - y0) / slope;
            if (xc - x0 > kMergeEps && x1 - xc > kMergeEps) xs.push_back(xc);
        }
    }
    std::sort(xs.begin(), xs.end());
    auto combined = [&](double x) { return outer.eval(inner.eval(x)); };
    xs = dedupe_sorted(std::move(xs), combined);
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = combined(xs[i]);
    return CPwL(std::move(xs), std::move(vals));
}

double sup_distance(const CPwL& f, const CPwL& g) {
    CPwL d = linear_combine({1.0, -1.0}, {f, g});
    double m = 0.0;
    for (double v : d.values()) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const CPwL& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

std::vector<std::pair<double, double>>
hat_decompose(const CPwL& g0, double grid_step, double support_end) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("hat_decompose: grid_step must be positive");
    if (g0.left_tail() != 0.0 || g0.right_tail() != 0.0)
        throw std::invalid_argument("hat_decompose: function has nonzero tails");
    double slo = 0.0, shi = 0.0;
    bool nonzero = g0.support(slo, shi);
    if (support_end < 0.0)
        support_end = nonzero ? std::ceil(shi - 1e-12) : 1.0;
    if (support_end <= 0.0) support_end = 1.0;
    if (nonzero && (slo < -1e-12 || shi > support_end + 1e-12))
        throw std::invalid_argument("hat_decompose: support exceeds [0, N]");
    double cells_d = support_end / grid_step;
    long cells = std::lround(cells_d);
    if (cells < 2 || std::abs(cells_d - static_cast<double>(cells)) > 1e-9)
        throw std::invalid_argument("hat_decompose: grid_step does not divide the support length");
    // Every breakpoint carrying the function must sit on the grid.
    for (std::size_t i = 0; i < g0.size(); ++i) {
        double x = g0.breakpoints()[i];
        if (x < -1e-12 || x > support_end + 1e-12) continue;
        double q = x / grid_step;
        if (std::abs(q - std::round(q)) > 1e-9)
            throw std::invalid_argument("hat_decompose: breakpoint off the grid (grid too coarse)");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(cells - 1));
    for (long j = 1; j < cells; ++j) {
        double xj = static_cast<double>(j) * grid_step;
        out.emplace_back(g0.eval(xj), xj - 0.5);
    }
    return out;
}

bool VecFunction::matched(double tol) const {
    for (std::size_t k = 0; k + 1 < components.size(); ++k)
        if (std::abs(components[k].eval(1.0) - components[k + 1].eval(0.0)) > tol) return false;
    return true;
}

VecFunction vectorize(const CPwL& g, int n) {
    if (n < 1) throw std::invalid_argument("vectorize: need at least one component");
    VecFunction v;
    v.components.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) v.components.push_back(dilate_shift(g, 1.0, -(k - 1.0)));
    return v;
}

}  // namespace relucc
