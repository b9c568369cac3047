#include "relucc/gadgets.hpp"

#include <cmath>
#include <stdexcept>

namespace relucc {

namespace {

double pow2(int e) { return std::ldexp(1.0, e); }

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void GadgetParams::validate() const {
    require(n >= 1, "GadgetParams: n must be >= 1");
    require(n <= 40, "GadgetParams: n beyond supported range");
    require(7.0 / 16.0 < alpha1, "GadgetParams: alpha1 <= 7/16");
    require(alpha1 < beta1 && beta1 < alpha2 && alpha2 < beta2 && beta2 < 0.5,
            "GadgetParams: need alpha1 < beta1 < alpha2 < beta2 < 1/2");
    require(0.5 - alpha1 < pow2(-n - 3), "GadgetParams: 1/2 - alpha1 >= 2^-n-3");
    require(0.5 - alpha2 < (0.5 - beta1) * pow2(-n + 1),
            "GadgetParams: 1/2 - alpha2 too large for the min pair");
    require(delta0 == pow2(-n - 3), "GadgetParams: delta0 != 2^-n-3");
    require(7.0 / 16.0 < alpha_mat && alpha_mat < beta_mat && beta_mat < 0.5,
            "GadgetParams: bad matrix-stage alpha/beta");
    require(0.5 - alpha_mat < pow2(-n - 3), "GadgetParams: 1/2 - alpha_mat >= 2^-n-3");
    require(M > 0.0, "GadgetParams: M must be positive");
}

GadgetParams default_params(int n, const Mask& mask, const CPwL& g) {
    if (n < 1) throw std::invalid_argument("default_params: n must be >= 1");
    GadgetParams p;
    p.n = n;
    p.alpha1 = 0.5 - pow2(-n - 4);
    p.beta1 = 0.5 - pow2(-n - 5);
    p.alpha2 = 0.5 - pow2(-2 * n - 5);
    p.beta2 = 0.5 - pow2(-2 * n - 6);
    p.delta0 = pow2(-n - 3);
    p.alpha_mat = p.alpha1;
    p.beta_mat = p.beta1;
    TransferPair t = transfer_matrices(mask);
    double b = std::max(t.T0.transposed().inf_norm(), t.T1.transposed().inf_norm());
    p.M = sup_norm(g) * std::pow(std::max(1.0, b), n);
    if (p.M == 0.0) p.M = 1.0;
    p.validate();
    return p;
}

GadgetPair smoothed_residual(double alpha, double beta) {
    require(7.0 / 16.0 < alpha && alpha < beta && beta < 0.5,
            "smoothed_residual: need 7/16 < alpha < beta < 1/2");
    CPwL fn({0.0, alpha, beta, 0.5, 1.0}, {0.0, 2.0 * alpha, 0.0, 0.0, 1.0});
    ReluNet net = net_from_cpwl(fn, 0.0, 1.0);
    return {std::move(fn), std::move(net)};
}

IndicatorPair smoothed_indicators(double delta0) {
    require(delta0 > 0.0, "smoothed_indicators: delta0 must be positive");
    CPwL lo({0.5, 0.5 + delta0}, {1.0, 0.0});
    CPwL hi({0.5 - delta0, 0.5}, {0.0, 1.0});
    ReluNet lo_net = net_from_cpwl(lo, 0.0, 1.0);
    ReluNet hi_net = net_from_cpwl(hi, 0.0, 1.0);
    return {std::move(lo), std::move(hi), std::move(lo_net), std::move(hi_net)};
}

ReluNet product_gadget(int N, double M) {
    require(N >= 1, "product_gadget: N must be >= 1");
    require(M > 0.0, "product_gadget: M must be positive");
    std::size_t n = static_cast<std::size_t>(N);
    // Input (x, y_1..y_N).
    Layer h1(Matrix(2 * n + 1, n + 1), std::vector<double>(2 * n + 1, 0.0), Act::Relu);
    for (std::size_t i = 0; i < n; ++i) {
        h1.W(i, 0) = M;  // relu(M x - y_i)
        h1.W(i, 1 + i) = -1.0;
        h1.W(n + i, 1 + i) = -1.0;  // relu(-y_i)
    }
    h1.W(2 * n, 0) = 1.0;  // relu(x)

    Layer h2(Matrix(2 * n, 2 * n + 1), std::vector<double>(2 * n, 0.0), Act::Relu);
    for (std::size_t i = 0; i < n; ++i) {
        h2.W(i, i) = 1.0;  // non-negative pass-through of relu(M x - y_i)
        h2.W(n + i, 2 * n) = -M;  // relu(M (1 - x) - relu(-y_i))
        h2.W(n + i, n + i) = -1.0;
        h2.bias[n + i] = M;
    }

    Layer out(Matrix(n, 2 * n), std::vector<double>(n, M), Act::Identity);
    for (std::size_t i = 0; i < n; ++i) {
        out.W(i, i) = -1.0;
        out.W(i, n + i) = -1.0;
    }
    return ReluNet({std::move(h1), std::move(h2), std::move(out)}, 0.0, 1.0);
}

std::vector<double> product_formula(double M, double x, const std::vector<double>& y) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double a = std::max(M * x - y[i], 0.0);
        double b = std::max(M * (1.0 - x) - std::max(-y[i], 0.0), 0.0);
        out[i] = -a - b + M;
    }
    return out;
}

ReluNet min_gadget() {
    Layer h(Matrix(3, 2), std::vector<double>(3, 0.0), Act::Relu);
    h.W(0, 1) = 1.0;   // relu(y)
    h.W(1, 1) = -1.0;  // relu(-y)
    h.W(2, 0) = -1.0;  // relu(y - x)
    h.W(2, 1) = 1.0;
    Layer out(Matrix(1, 3), {0.0}, Act::Identity);
    out.W(0, 0) = 1.0;
    out.W(0, 1) = -1.0;
    out.W(0, 2) = -1.0;
    return ReluNet({std::move(h), std::move(out)}, -1.0, 1.0);
}

GadgetPair ramp(int k) {
    require(k >= 1, "ramp: k must be >= 1");
    CPwL fn({static_cast<double>(k - 1), static_cast<double>(k)}, {0.0, 1.0});
    ReluNet net = net_from_cpwl(fn, 0.0, static_cast<double>(k) + 1.0);
    return {std::move(fn), std::move(net)};
}

GadgetPair special_hat() {
    CPwL fn({3.0 / 8.0, 0.5, 5.0 / 8.0}, {0.0, 1.0, 0.0});
    ReluNet net = net_from_cpwl(fn, 0.0, 1.0);
    return {std::move(fn), std::move(net)};
}

bool is_special(const CPwL& g) { return g.is_nonneg_supported_in(1.0 / 8.0, 7.0 / 8.0); }

std::vector<std::pair<double, double>> lambda_intervals(int n) {
    if (n < 0) throw std::invalid_argument("lambda_intervals: n must be non-negative");
    double step = pow2(-n), half = pow2(-n - 3);
    long count = 1L << n;
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(count) + 1);
    for (long j = 0; j <= count; ++j) {
        double c = static_cast<double>(j) * step;
        out.emplace_back(std::max(0.0, c - half), std::min(1.0, c + half));
    }
    return out;
}

bool in_omega(double x, int n, double delta) {
    if (x < 0.0 || x > 1.0) return false;
    for (int j = 1; j <= n; ++j) {
        double y = std::ldexp(x, j);
        double i = std::ceil(y);
        if (i >= 1.0 && i <= std::ldexp(1.0, j) - 1.0 && y >= i - 2.0 * delta) return false;
    }
    return true;
}

}  // namespace relucc
