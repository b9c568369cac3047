#include "relucc/cascade.hpp"

#include <cmath>
#include <stdexcept>

namespace relucc {

CPwL apply_V(const Mask& mask, const CPwL& g) {
    std::vector<CPwL> terms;
    terms.reserve(mask.coefficients.size());
    for (std::size_t j = 0; j < mask.coefficients.size(); ++j)
        terms.push_back(dilate_shift(g, 2.0, static_cast<double>(j)));
    return linear_combine(mask.coefficients, terms);
}

CPwL apply_Vn(const Mask& mask, const CPwL& g, int n) {
    if (n < 0) throw std::invalid_argument("apply_Vn: n must be non-negative");
    CPwL out = g;
    for (int i = 0; i < n; ++i) out = apply_V(mask, out);
    return out;
}

double BitTrace::reconstruction() const {
    double s = 0.0, w = 1.0;
    for (int b : bits) {
        w *= 0.5;
        s += w * b;
    }
    return s + w * (residuals.empty() ? x : residuals.back());
}

BitTrace bit_trace(double x, int n) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("bit_trace: x outside [0, 1]");
    if (n < 0) throw std::invalid_argument("bit_trace: n must be non-negative");
    BitTrace t;
    t.x = x;
    t.bits.reserve(static_cast<std::size_t>(n));
    t.residuals.reserve(static_cast<std::size_t>(n));
    double r = x;
    for (int j = 0; j < n; ++j) {
        int b = r >= 0.5 ? 1 : 0;
        r = 2.0 * r - b;
        t.bits.push_back(b);
        t.residuals.push_back(r);
    }
    return t;
}

double residual_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x >= 0.5 ? 2.0 * x - 1.0 : 2.0 * x;
}

double residual(double x, int n) {
    double r = x;
    for (int j = 0; j < n; ++j) r = residual_step(r);
    return r;
}

std::vector<double> cascade_Gn(const Mask& mask, const CPwL& g, double x, int n) {
    int N = mask.support_end();
    if (!g.is_supported_in(0.0, static_cast<double>(N)))
        throw std::invalid_argument("cascade_Gn: g must be supported on [0, N]");
    BitTrace t = bit_trace(x, n);
    TransferPair tp = transfer_matrices(mask);
    double rn = t.residuals.empty() ? x : t.residuals.back();
    std::vector<double> v(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) v[static_cast<std::size_t>(k)] = g.eval(rn + k);
    for (int j = n - 1; j >= 0; --j)
        v = (t.bits[static_cast<std::size_t>(j)] == 0 ? tp.T0 : tp.T1).matvec(v);
    return v;
}

double fit_geometric_rate(const std::vector<double>& ns, const std::vector<double>& ys,
                          double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(ys[i] > floor)) continue;
        double x = ns[i], y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    double denom = m * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    double slope = (m * sxy - sx * sy) / denom;
    return std::exp(slope);
}

FixedPointRun fixed_point_iterate(const Mask& mask, const CPwL& phi0, int n_max) {
    if (n_max < 1) throw std::invalid_argument("fixed_point_iterate: n_max must be >= 1");
    FixedPointRun run;
    CPwL cur = phi0;
    std::vector<double> ns, ds;
    for (int n = 0; n < n_max; ++n) {
        CPwL next = apply_V(mask, cur);
        double d = sup_distance(next, cur);
        run.records.push_back({n, d});
        ns.push_back(static_cast<double>(n));
        ds.push_back(d);
        cur = std::move(next);
    }
    run.fitted_lambda = fit_geometric_rate(ns, ds);
    return run;
}

}  // namespace relucc
