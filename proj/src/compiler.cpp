#include "relucc/compiler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relucc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pow2(int e) { return std::ldexp(1.0, e); }

// Affine expression over the channels of the layer under construction's
// input (= previous layer's outputs).
struct Aff {
    std::vector<double> w;
    double b = 0.0;
};

Aff aff_zero(std::size_t width) { return {std::vector<double>(width, 0.0), 0.0}; }

Aff aff_unit(std::size_t j, std::size_t width) {
    Aff a = aff_zero(width);
    a.w[j] = 1.0;
    return a;
}

Aff aff_scale(Aff a, double s) {
    for (double& x : a.w) x *= s;
    a.b *= s;
    return a;
}

Aff aff_add(Aff a, const Aff& b) {
    for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] += b.w[i];
    a.b += b.b;
    return a;
}

Aff aff_sub(Aff a, const Aff& b) {
    for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] -= b.w[i];
    a.b -= b.b;
    return a;
}

// Collects the rows of one layer; rows are affine in the previous layer.
struct LayerSpec {
    std::size_t in_width;
    std::vector<Aff> rows;
    std::vector<Act> acts;
    std::vector<double> bounds;

    explicit LayerSpec(std::size_t in) : in_width(in) {}

    std::size_t add(Aff a, Act act, double bound = kNaN) {
        if (a.w.size() != in_width) throw std::logic_error("LayerSpec: row width mismatch");
        rows.push_back(std::move(a));
        acts.push_back(act);
        bounds.push_back(bound);
        return rows.size() - 1;
    }
    std::size_t relu(Aff a) { return add(std::move(a), Act::Relu); }
    std::size_t identity(Aff a, double bound) { return add(std::move(a), Act::Identity, bound); }

    Layer to_layer() const {
        Layer l;
        l.W = Matrix(rows.size(), in_width);
        l.bias.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < in_width; ++j) l.W(i, j) = rows[i].w[j];
            l.bias[i] = rows[i].b;
        }
        l.act = acts;
        l.bound = bounds;
        return l;
    }
};

// Emits relu(u - b_i) nodes, one per breakpoint of fn; the function's value
// is recovered affinely from them (net_from_cpwl's slope-difference form).
std::size_t emit_pwl(LayerSpec& L, const CPwL& fn, const Aff& u) {
    std::size_t first = L.rows.size();
    for (double bp : fn.breakpoints()) {
        Aff a = u;
        a.b -= bp;
        L.relu(std::move(a));
    }
    return first;
}

Aff pwl_value(const CPwL& fn, std::size_t first, std::size_t width) {
    Aff a = aff_zero(width);
    a.b = fn.values().front();
    const auto& bp = fn.breakpoints();
    const auto& v = fn.values();
    double prev = 0.0;
    for (std::size_t i = 0; i < bp.size(); ++i) {
        double slope = (i + 1 < bp.size()) ? (v[i + 1] - v[i]) / (bp[i + 1] - bp[i]) : 0.0;
        a.w[first + i] = slope - prev;
        prev = slope;
    }
    return a;
}

int coordinate_width_bound(int m, int N) {
    return std::max({1 + 2 * std::max(m, 5), N + 10, 4 * N + 3});
}

// The coordinate network of the matrix-stage construction: head computing
// (x, g(Rhat1^n), g(Rhat2^n)), the min pair fused into the first block, then
// n product blocks, then the e_1 readout.  Depth 4n + 1.
ReluNet coordinate_net(const CPwL& g, int k, int n, const Mask& mask,
                       const GadgetParams& p) {
    int N = mask.support_end();
    TransferPair tp = transfer_matrices(mask);
    Matrix T0t = tp.T0.transposed();
    Matrix T1t = tp.T1.transposed();
    CPwL r1 = smoothed_residual(p.alpha1, p.beta1).fn;
    CPwL r2 = smoothed_residual(p.alpha2, p.beta2).fn;
    CPwL rm = smoothed_residual(p.alpha_mat, p.beta_mat).fn;
    IndicatorPair ind = smoothed_indicators(p.delta0);

    std::vector<Layer> layers;
    std::size_t width = 1;  // current input width (starts at the scalar input)

    // Head layers 1..n: forward x, iterate both smoothed residuals.
    Aff x_val = aff_unit(0, 1);
    Aff r1_val = x_val, r2_val = x_val;
    for (int j = 1; j <= n; ++j) {
        LayerSpec L(width);
        std::size_t xi = L.relu(x_val);  // x >= 0 on [0, 1]
        std::size_t i1 = emit_pwl(L, r1, r1_val);
        std::size_t i2 = emit_pwl(L, r2, r2_val);
        layers.push_back(L.to_layer());
        width = L.rows.size();
        x_val = aff_unit(xi, width);
        r1_val = pwl_value(r1, i1, width);
        r2_val = pwl_value(r2, i2, width);
    }

    // Head layer n+1: both copies of g applied to the residual iterates.
    Aff a_val, b_val;
    {
        LayerSpec L(width);
        std::size_t xi = L.relu(x_val);
        std::size_t ia = emit_pwl(L, g, r1_val);
        std::size_t ib = emit_pwl(L, g, r2_val);
        layers.push_back(L.to_layer());
        width = L.rows.size();
        x_val = aff_unit(xi, width);
        a_val = pwl_value(g, ia, width);
        b_val = pwl_value(g, ib, width);
    }

    // Product blocks j = 1..n.  Block j's first layer applies the matrix-stage
    // residual and both indicators to Rhat^{j-1} and holds F^{j-1}; block 1
    // instead derives F^0 = min(a, b) from the non-negative pair
    // (min{a,b} = b - relu(b - a)).
    Aff rhat_val;        // Rhat^{j} once block j's first layer is built
    Aff chi0, chi1;      // indicator values of Rhat^{j-1}
    std::vector<Aff> F;  // F^{j-1} entries as affine reads
    for (int j = 1; j <= n; ++j) {
        {
            LayerSpec L(width);
            Aff src = (j == 1) ? x_val : rhat_val;
            if (j > 1) L.relu(src);  // the enumerated forward node
            std::size_t im = emit_pwl(L, rm, src);
            std::size_t il = emit_pwl(L, ind.lo_fn, src);
            std::size_t ih = emit_pwl(L, ind.hi_fn, src);
            std::vector<std::size_t> fidx;
            std::size_t minb = 0, minba = 0;
            if (j == 1) {
                minb = L.relu(b_val);
                minba = L.relu(aff_sub(b_val, a_val));
                // Inert padding up to the enumerated width N + 10.
                while (L.rows.size() < static_cast<std::size_t>(N) + 10)
                    L.relu(aff_zero(width));
            } else {
                for (int c = 0; c < N; ++c)
                    fidx.push_back(L.identity(F[static_cast<std::size_t>(c)], p.M));
            }
            layers.push_back(L.to_layer());
            width = L.rows.size();
            rhat_val = pwl_value(rm, im, width);
            chi0 = pwl_value(ind.lo_fn, il, width);
            chi1 = pwl_value(ind.hi_fn, ih, width);
            F.assign(static_cast<std::size_t>(N), aff_zero(width));
            if (j == 1) {
                F[static_cast<std::size_t>(k - 1)] =
                    aff_sub(aff_unit(minb, width), aff_unit(minba, width));
            } else {
                for (int c = 0; c < N; ++c)
                    F[static_cast<std::size_t>(c)] = aff_unit(fidx[static_cast<std::size_t>(c)], width);
            }
        }

        // y0 = T0^T F^T, y1 = T1^T F^T as affine expressions.
        std::vector<Aff> y0(static_cast<std::size_t>(N), aff_zero(width));
        std::vector<Aff> y1(static_cast<std::size_t>(N), aff_zero(width));
        for (int i = 0; i < N; ++i) {
            for (int c = 0; c < N; ++c) {
                std::size_t ii = static_cast<std::size_t>(i), cc = static_cast<std::size_t>(c);
                y0[ii] = aff_add(std::move(y0[ii]), aff_scale(F[cc], T0t(ii, cc)));
                y1[ii] = aff_add(std::move(y1[ii]), aff_scale(F[cc], T1t(ii, cc)));
            }
        }

        // Product layer 1: relu(M chi - y_i), relu(-y_i), relu(chi), twice.
        std::size_t p0a, p0b, p0x, p1a, p1b, p1x, rfwd;
        {
            LayerSpec L(width);
            rfwd = L.relu(rhat_val);
            p0a = L.rows.size();
            for (int i = 0; i < N; ++i)
                L.relu(aff_sub(aff_scale(chi0, p.M), y0[static_cast<std::size_t>(i)]));
            p0b = L.rows.size();
            for (int i = 0; i < N; ++i)
                L.relu(aff_scale(y0[static_cast<std::size_t>(i)], -1.0));
            p0x = L.relu(chi0);
            p1a = L.rows.size();
            for (int i = 0; i < N; ++i)
                L.relu(aff_sub(aff_scale(chi1, p.M), y1[static_cast<std::size_t>(i)]));
            p1b = L.rows.size();
            for (int i = 0; i < N; ++i)
                L.relu(aff_scale(y1[static_cast<std::size_t>(i)], -1.0));
            p1x = L.relu(chi1);
            layers.push_back(L.to_layer());
            width = L.rows.size();
        }

        // Product layer 2: pass the first group, form relu(M(1-chi) - relu(-y)).
        std::size_t q0a, q0b, q1a, q1b;
        {
            LayerSpec L(width);
            std::size_t rf = L.relu(aff_unit(rfwd, width));
            q0a = L.rows.size();
            for (int i = 0; i < N; ++i) L.relu(aff_unit(p0a + static_cast<std::size_t>(i), width));
            q0b = L.rows.size();
            for (int i = 0; i < N; ++i) {
                Aff a = aff_scale(aff_unit(p0x, width), -p.M);
                a = aff_sub(std::move(a), aff_unit(p0b + static_cast<std::size_t>(i), width));
                a.b += p.M;
                L.relu(std::move(a));
            }
            q1a = L.rows.size();
            for (int i = 0; i < N; ++i) L.relu(aff_unit(p1a + static_cast<std::size_t>(i), width));
            q1b = L.rows.size();
            for (int i = 0; i < N; ++i) {
                Aff a = aff_scale(aff_unit(p1x, width), -p.M);
                a = aff_sub(std::move(a), aff_unit(p1b + static_cast<std::size_t>(i), width));
                a.b += p.M;
                L.relu(std::move(a));
            }
            layers.push_back(L.to_layer());
            width = L.rows.size();
            rhat_val = aff_unit(rf, width);
        }

        // F^j entries, read affinely off the two product outputs.
        for (int i = 0; i < N; ++i) {
            std::size_t ii = static_cast<std::size_t>(i);
            Aff f = aff_zero(width);
            f.b = 2.0 * p.M;
            f.w[q0a + ii] -= 1.0;
            f.w[q0b + ii] -= 1.0;
            f.w[q1a + ii] -= 1.0;
            f.w[q1b + ii] -= 1.0;
            F[ii] = std::move(f);
        }
    }

    // Readout: the first coordinate of F^n.
    {
        LayerSpec L(width);
        L.identity(F[0], kNaN);
        layers.push_back(L.to_layer());
    }
    return ReluNet(std::move(layers), 0.0, 1.0);
}

ReluNet ramp_bank(int N) {
    std::size_t n = static_cast<std::size_t>(N);
    Layer h(Matrix(2 * n, 1), std::vector<double>(2 * n, 0.0), Act::Relu);
    Layer out(Matrix(n, 2 * n), std::vector<double>(n, 0.0), Act::Identity);
    for (std::size_t kk = 0; kk < n; ++kk) {
        double k1 = static_cast<double>(kk);  // k - 1
        h.W(2 * kk, 0) = 1.0;
        h.bias[2 * kk] = -k1;  // relu(x - k + 1)
        h.W(2 * kk + 1, 0) = 1.0;
        h.bias[2 * kk + 1] = -(k1 + 1.0);  // relu(x - k)
        out.W(kk, 2 * kk) = 1.0;
        out.W(kk, 2 * kk + 1) = -1.0;
    }
    return ReluNet({std::move(h), std::move(out)}, -2.0, static_cast<double>(N) + 2.0);
}

void check_special(const CPwL& g, const char* who) {
    if (!is_special(g))
        throw std::invalid_argument(std::string(who) +
                                    ": seed must be non-negative with support in [1/8, 7/8]");
}

}  // namespace

std::string to_string(CompileStage s) {
    switch (s) {
        case CompileStage::SpecialGRn: return "special_gRn";
        case CompileStage::Coordinate: return "coordinate";
        case CompileStage::SpecialVn: return "special_Vng";
        case CompileStage::GeneralVn: return "general_Vng";
    }
    return "?";
}

CompileArtifact compile_g_of_Rn(const CPwL& g, int n, const GadgetParams& params) {
    check_special(g, "compile_g_of_Rn");
    params.validate();
    if (params.n != n) throw std::invalid_argument("compile_g_of_Rn: params built for another n");
    int m = static_cast<int>(g.size());

    ReluNet rh1 = smoothed_residual(params.alpha1, params.beta1).net;
    ReluNet rh2 = smoothed_residual(params.alpha2, params.beta2).net;
    ReluNet it1 = rh1, it2 = rh2;
    for (int j = 1; j < n; ++j) {
        it1 = compose(rh1, it1);
        it2 = compose(rh2, it2);
    }
    ReluNet gnet = net_from_cpwl(g, 0.0, 1.0);
    ReluNet both = stack(compose(gnet, it1), compose(gnet, it2));
    ReluNet net = compose(min_gadget(), both);
    net.set_domain(-1.0, 2.0);
    return {lower(net), params, 2 * std::max(m, 5), n + 2, CompileStage::SpecialGRn};
}

CompileArtifact compile_coordinate(const CPwL& g, int k, int n, const Mask& mask,
                                   const GadgetParams& params) {
    check_special(g, "compile_coordinate");
    params.validate();
    if (params.n != n) throw std::invalid_argument("compile_coordinate: params built for another n");
    int N = mask.support_end();
    if (k < 1 || k > N) throw std::invalid_argument("compile_coordinate: k out of range");
    int m = static_cast<int>(g.size());
    ReluNet net = lower(coordinate_net(g, k, n, mask, params));
    return {std::move(net), params, coordinate_width_bound(m, N), 4 * n + 1,
            CompileStage::Coordinate};
}

CompileArtifact compile_Vn_special(const CPwL& g, int n, const Mask& mask,
                                   const GadgetParams& params, const CompileOptions& opts) {
    check_special(g, "compile_Vn_special");
    params.validate();
    if (params.n != n) throw std::invalid_argument("compile_Vn_special: params built for another n");
    int N = mask.support_end();
    int m = static_cast<int>(g.size());
    int W = coordinate_width_bound(m, N);

    ReluNet bank = ramp_bank(N);
    ReluNet net = bank;
    int width_bound, depth_bound;
    if (!opts.depth_heavy) {
        ReluNet stacked = coordinate_net(g, 1, n, mask, params);
        for (int k = 2; k <= N; ++k)
            stacked = stack_parallel(stacked, coordinate_net(g, k, n, mask, params));
        // Summing readout merges into the stacked net's affine output.
        Layer ones(Matrix(1, static_cast<std::size_t>(N)), {0.0}, Act::Identity);
        for (int k = 0; k < N; ++k) ones.W(0, static_cast<std::size_t>(k)) = 1.0;
        ReluNet summed = compose(ReluNet({ones}, 0.0, 1.0), stacked);
        net = compose(summed, bank);
        width_bound = N * W;
        depth_bound = 4 * n + 2;
    } else {
        double out_bound = sup_norm(apply_Vn(mask, g, n));
        std::vector<ReluNet> terms;
        std::vector<double> bounds;
        for (int k = 1; k <= N; ++k) {
            GadgetPair r = ramp(k);
            ReluNet term = compose(coordinate_net(g, k, n, mask, params), r.net);
            term.set_domain(-2.0, static_cast<double>(N) + 2.0);
            terms.push_back(std::move(term));
            bounds.push_back(out_bound);
        }
        net = sum_nets(terms, bounds);
        width_bound = W + 2;
        depth_bound = N * (4 * n + 2);
    }
    net.set_domain(-2.0, static_cast<double>(N) + 2.0);
    if (opts.lower_net) net = lower(net);
    return {std::move(net), params, width_bound, depth_bound, CompileStage::SpecialVn};
}

double refinement_grid_step(const CPwL& g0) {
    const auto& bp = g0.breakpoints();
    double gap_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < bp.size(); ++i) gap_min = std::min(gap_min, bp[i] - bp[i - 1]);
    int e = 3;
    if (std::isfinite(gap_min) && gap_min < 1.0)
        e = static_cast<int>(std::ceil(std::log2(1.0 / gap_min))) + 3;
    return pow2(-e);
}

double tight_product_bound(const CPwL& g, int n, const Mask& mask) {
    int N = mask.support_end();
    TransferPair tp = transfer_matrices(mask);
    long steps = 1L << (n + 4);
    double best = 0.0;
    for (long i = 0; i <= steps; ++i) {
        double x = std::ldexp(static_cast<double>(i), -n - 4);
        BitTrace t = bit_trace(x, n);
        double grn = g.eval(t.residuals.empty() ? x : t.residuals.back());
        if (grn == 0.0) continue;
        Matrix prod = Matrix::identity(static_cast<std::size_t>(N));
        for (int j = 0; j < n; ++j) {
            for (double v : prod.matmul(tp.T0).a) best = std::max(best, std::abs(grn * v));
            for (double v : prod.matmul(tp.T1).a) best = std::max(best, std::abs(grn * v));
            prod = prod.matmul(t.bits[static_cast<std::size_t>(j)] == 0 ? tp.T0 : tp.T1);
        }
    }
    return best > 0.0 ? 2.0 * best : 1.0;
}

CompileArtifact compile_Vn(const CPwL& g0, int n, const Mask& mask, const CompileOptions& opts) {
    if (n < 1) throw std::invalid_argument("compile_Vn: n must be >= 1");
    int N = mask.support_end();
    if (!g0.is_supported_in(0.0, static_cast<double>(N)))
        throw std::invalid_argument("compile_Vn: seed must be supported on [0, N]");

    if (is_special(g0)) {
        GadgetParams params = default_params(n, mask, g0);
        if (opts.tight_m) params.M = tight_product_bound(g0, n, mask);
        return compile_Vn_special(g0, n, mask, params, opts);
    }

    double h = refinement_grid_step(g0);
    auto decomp = hat_decompose(g0, h, static_cast<double>(N));
    CPwL unit_hat = CPwL::hat(0.5 - h, 0.5 + h);
    GadgetParams params = default_params(n, mask, unit_hat);
    if (opts.tight_m) params.M = tight_product_bound(unit_hat, n, mask);

    CompileOptions raw = opts;
    raw.lower_net = false;
    CompileArtifact base = compile_Vn_special(unit_hat, n, mask, params, raw);
    double base_norm = sup_norm(apply_Vn(mask, unit_hat, n));

    std::vector<ReluNet> terms;
    std::vector<double> bounds;
    terms.reserve(decomp.size());
    for (const auto& [coeff, shift] : decomp) {
        ReluNet t = scale_output(input_affine(base.net, 1.0, std::ldexp(shift, -n)), coeff);
        t.set_domain(-2.0, static_cast<double>(N) + 2.0);
        terms.push_back(std::move(t));
        bounds.push_back(std::abs(coeff) * base_norm);
    }
    ReluNet net = sum_nets(terms, bounds);
    net.set_domain(-2.0, static_cast<double>(N) + 2.0);
    if (opts.lower_net) net = lower(net);
    int width_bound = base.width_bound + 2;
    int depth_bound = static_cast<int>(terms.size()) * base.depth_bound;
    return {std::move(net), params, width_bound, depth_bound, CompileStage::GeneralVn};
}

ExpectedBounds expected_bounds(const CPwL& g0, int n, const Mask& mask,
                               const CompileOptions& opts) {
    int N = mask.support_end();
    int m = static_cast<int>(g0.size());
    ExpectedBounds e;
    if (is_special(g0)) {
        int W = coordinate_width_bound(m, N);
        e.stage = CompileStage::SpecialVn;
        if (!opts.depth_heavy) {
            e.width_bound = N * W;
            e.depth_bound = 4 * n + 2;
        } else {
            e.width_bound = W + 2;
            e.depth_bound = N * (4 * n + 2);
        }
        return e;
    }
    double h = refinement_grid_step(g0);
    long terms = std::lround(static_cast<double>(N) / h) - 1;
    int W = coordinate_width_bound(3, N);
    e.stage = CompileStage::GeneralVn;
    if (!opts.depth_heavy) {
        e.width_bound = N * W + 2;
        e.depth_bound = static_cast<int>(terms) * (4 * n + 2);
    } else {
        e.width_bound = W + 4;
        e.depth_bound = static_cast<int>(terms) * N * (4 * n + 2);
    }
    return e;
}

Report verify_net(const ReluNet& net, int width_bound, int depth_bound, const Mask& mask,
                  const CPwL& g, int n, double grid_step, double tol) {
    (void)tol;
    int N = mask.support_end();
    CPwL oracle = apply_Vn(mask, g, n);
    double lo = -1.0, hi = static_cast<double>(N) + 1.0;
    std::size_t count = static_cast<std::size_t>(std::floor((hi - lo) / grid_step)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = lo + static_cast<double>(i) * grid_step;

    std::vector<double> got(count);
    BatchEvaluator ev(net);
    parallel_chunks(count, [&](std::size_t b, std::size_t e) {
        ev.eval(std::span<const double>(xs.data() + b, e - b), got.data() + b);
    });

    Report rep;
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double d = std::abs(got[i] - oracle.eval(xs[i]));
        rep.max_dev = std::max(rep.max_dev, d);
        sum += d;
    }
    rep.mean_dev = sum / static_cast<double>(count);
    SizeReport sr = size_report(net);
    rep.width = sr.width;
    rep.depth = sr.depth;
    rep.params = sr.params;
    rep.bounds_ok = sr.width <= width_bound && sr.depth <= depth_bound;
    return rep;
}

Report verify(const CompileArtifact& artifact, const Mask& mask, const CPwL& g, int n,
              double grid_step, double tol) {
    return verify_net(artifact.net, artifact.width_bound, artifact.depth_bound, mask, g, n,
                      grid_step, tol);
}

std::vector<double> modified_coordinate_eval(const CPwL& g, int k, int n, const Mask& mask,
                                             const GadgetParams& params, double x) {
    int N = mask.support_end();
    if (k < 1 || k > N) throw std::invalid_argument("modified_coordinate_eval: k out of range");
    TransferPair tp = transfer_matrices(mask);
    Matrix T0t = tp.T0.transposed();
    Matrix T1t = tp.T1.transposed();
    CPwL rm = smoothed_residual(params.alpha_mat, params.beta_mat).fn;
    IndicatorPair ind = smoothed_indicators(params.delta0);

    std::vector<double> F(static_cast<std::size_t>(N), 0.0);
    F[static_cast<std::size_t>(k - 1)] = g.eval(residual(x, n));
    double rhat = x;
    for (int j = 1; j <= n; ++j) {
        std::vector<double> y0 = T0t.matvec(F);
        std::vector<double> y1 = T1t.matvec(F);
        std::vector<double> a = product_formula(params.M, ind.lo_fn.eval(rhat), y0);
        std::vector<double> b = product_formula(params.M, ind.hi_fn.eval(rhat), y1);
        for (std::size_t i = 0; i < F.size(); ++i) F[i] = a[i] + b[i];
        rhat = rm.eval(rhat);
    }
    return F;
}

}  // namespace relucc
