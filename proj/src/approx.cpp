#include "relucc/approx.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "relucc/cascade.hpp"
#include "relucc/serialize.hpp"

namespace relucc {

namespace {

// Max/mean deviation of a scalar net from a CPwL reference on a uniform grid.
std::pair<double, double> grid_deviation(const ReluNet& net, const CPwL& ref, double lo,
                                         double hi, double step) {
    std::size_t count = static_cast<std::size_t>(std::floor((hi - lo) / step)) + 1;
    std::vector<double> xs(count), got(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = lo + static_cast<double>(i) * step;
    BatchEvaluator ev(net);
    parallel_chunks(count, [&](std::size_t b, std::size_t e) {
        ev.eval(std::span<const double>(xs.data() + b, e - b), got.data() + b);
    });
    double mx = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double d = std::abs(got[i] - ref.eval(xs[i]));
        mx = std::max(mx, d);
        sum += d;
    }
    return {mx, sum / static_cast<double>(count)};
}

}  // namespace

ConvergenceRun approximate_phi(const Mask& mask, const CPwL& phi0, int n_max, int ref_extra,
                               const CompileOptions& opts, double grid_step) {
    if (n_max < 1) throw std::invalid_argument("approximate_phi: n_max must be >= 1");
    if (ref_extra < 0) throw std::invalid_argument("approximate_phi: ref_extra must be >= 0");
    int N = mask.support_end();
    ConvergenceRun run;
    run.mask_name = mask.name.empty() ? "custom" : mask.name;
    run.seed_desc = "cpwl[" + dtos(phi0.breakpoints().front()) + "," +
                    dtos(phi0.breakpoints().back()) + "]";
    run.ref_level = n_max + ref_extra;
    run.grid_step = grid_step;
    CPwL phi_ref = apply_Vn(mask, phi0, run.ref_level);
    std::vector<double> ns, es;
    for (int n = 1; n <= n_max; ++n) {
        CompileArtifact art = compile_Vn(phi0, n, mask, opts);
        auto [mx, mean] = grid_deviation(art.net, phi_ref, -1.0, N + 1.0, grid_step);
        (void)mean;
        SizeReport sr = size_report(art.net);
        run.records.push_back({n, mx, sr.width, sr.depth, sr.params});
        ns.push_back(n);
        es.push_back(mx);
    }
    run.fitted_lambda = fit_geometric_rate(ns, es);
    return run;
}

std::string convergence_csv(const ConvergenceRun& run) {
    std::ostringstream out;
    out << "n,error,width,depth,params\n";
    for (const auto& r : run.records)
        out << r.n << ',' << dtos(r.error) << ',' << r.width << ',' << r.depth << ','
            << r.params << '\n';
    return out.str();
}

std::string convergence_summary_json(const ConvergenceRun& run) {
    std::ostringstream out;
    out << "{\"fitted_lambda\":" << dtos(run.fitted_lambda) << ",\"grid_step\":"
        << dtos(run.grid_step) << ",\"mask\":\"" << run.mask_name << "\",\"n_max\":"
        << (run.records.empty() ? 0 : run.records.back().n) << ",\"ref_level\":"
        << run.ref_level << ",\"seed\":\"" << run.seed_desc << "\"}";
    return out.str();
}

ReluNet build_wavelet(const ReluNet& phi_net, const std::vector<std::pair<double, double>>& combo,
                      double dilation, double phi_bound) {
    if (combo.empty()) throw std::invalid_argument("build_wavelet: empty combination");
    if (combo.size() == 1 && dilation == 1.0 && combo[0].second == 0.0 && combo[0].first == 1.0)
        return phi_net;
    std::vector<ReluNet> terms;
    std::vector<double> bounds;
    double lo = 0, hi = 0;
    bool domain_set = false;
    for (const auto& [coeff, shift] : combo) {
        ReluNet t = scale_output(input_affine(phi_net, dilation, shift), coeff);
        if (!domain_set) {
            lo = t.domain_lo();
            hi = t.domain_hi();
            domain_set = true;
        } else {
            lo = std::min(lo, t.domain_lo());
            hi = std::max(hi, t.domain_hi());
        }
        terms.push_back(std::move(t));
        bounds.push_back(std::abs(coeff) * phi_bound);
    }
    for (auto& t : terms) t.set_domain(lo, hi);
    return lower(sum_nets(terms, bounds));
}

CPwL wavelet_cpwl(const CPwL& phi_ref, const std::vector<std::pair<double, double>>& combo,
                  double dilation) {
    if (combo.empty()) throw std::invalid_argument("wavelet_cpwl: empty combination");
    std::vector<double> coeffs;
    std::vector<CPwL> parts;
    for (const auto& [coeff, shift] : combo) {
        coeffs.push_back(coeff);
        parts.push_back(dilate_shift(phi_ref, dilation, shift));
    }
    return linear_combine(coeffs, parts);
}

std::vector<std::pair<double, double>> qmf_combo(const Mask& mask) {
    std::vector<std::pair<double, double>> combo;
    int N = mask.support_end();
    for (int j = 1 - N; j <= 1; ++j) {
        double c = mask.coeff(1 - j);
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        combo.emplace_back(sign * c, static_cast<double>(j));
    }
    return combo;
}

double DyadicInterval::lo() const { return std::ldexp(static_cast<double>(j), -k); }
double DyadicInterval::hi() const { return std::ldexp(static_cast<double>(j + 1), -k); }

DyadicInterval dyadic_interval(double lo, double hi) {
    double len = hi - lo;
    if (!(len > 0.0)) throw std::invalid_argument("dyadic_interval: empty interval");
    double k_d = -std::log2(len);
    int k = static_cast<int>(std::lround(k_d));
    if (std::abs(std::ldexp(1.0, -k) - len) > 1e-12)
        throw std::invalid_argument("dyadic_interval: length is not a power of two");
    double j_d = lo * std::ldexp(1.0, k);
    long j = std::lround(j_d);
    if (std::abs(j_d - static_cast<double>(j)) > 1e-9)
        throw std::invalid_argument("dyadic_interval: endpoint not on the dyadic grid");
    return {j, k};
}

WaveletFactory::Built WaveletFactory::build(int level) const {
    CompileArtifact art = compile_Vn(phi0, level, mask, opts);
    CPwL phi_ref = apply_Vn(mask, phi0, level + ref_extra);
    double phi_bound = sup_norm(phi_ref) + 1.0;
    ReluNet psi_net = build_wavelet(art.net, combo, dilation, phi_bound);
    CPwL psi_ref = wavelet_cpwl(phi_ref, combo, dilation);
    double psi_bound = 0.0;
    for (const auto& [c, s] : combo) psi_bound += std::abs(c) * phi_bound;
    return {std::move(psi_ref), std::move(psi_net), psi_bound};
}

NTermReport nterm_demo(const std::vector<NTermTerm>& terms, const WaveletFactory& factory,
                       int level, double grid_step) {
    if (terms.empty()) throw std::invalid_argument("nterm_demo: no terms");
    WaveletFactory::Built built = factory.build(level);

    // Common grid covering every transformed support.
    double psi_lo = built.psi_ref.breakpoints().front();
    double psi_hi = built.psi_ref.breakpoints().back();
    double glo = 0, ghi = 0;
    bool first = true;
    for (const auto& t : terms) {
        double scale = std::ldexp(1.0, -t.interval.k);
        double lo = (psi_lo - 1.0 + static_cast<double>(t.interval.j)) * scale;
        double hi = (psi_hi + 1.0 + static_cast<double>(t.interval.j)) * scale;
        if (first) {
            glo = lo;
            ghi = hi;
            first = false;
        } else {
            glo = std::min(glo, lo);
            ghi = std::max(ghi, hi);
        }
    }
    std::size_t count = static_cast<std::size_t>(std::floor((ghi - glo) / grid_step)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = glo + static_cast<double>(i) * grid_step;

    NTermReport rep;
    rep.grid_step = grid_step;
    for (const auto& t : terms) rep.coeff_abs_sum += std::abs(t.coeff);

    // Per-term rows of psi_hat_I on the grid (zero outside the transformed
    // support window; the surrogate vanishes there along with psi_I).
    BatchEvaluator ev(built.psi_net);
    std::vector<std::vector<double>> rows(terms.size());
    std::vector<double> diff(count, 0.0);
    for (std::size_t ti = 0; ti < terms.size(); ++ti) {
        const auto& t = terms[ti];
        double scale = std::ldexp(1.0, -t.interval.k);
        double amp = std::sqrt(std::ldexp(1.0, t.interval.k));
        double wlo = (psi_lo - 1.0 + static_cast<double>(t.interval.j)) * scale;
        double whi = (psi_hi + 1.0 + static_cast<double>(t.interval.j)) * scale;
        rows[ti].assign(count, 0.0);
        std::size_t b = static_cast<std::size_t>(
            std::max(0.0, std::ceil((wlo - glo) / grid_step)));
        std::size_t e = std::min(count, static_cast<std::size_t>(std::max(
                                            0.0, std::floor((whi - glo) / grid_step))) + 1);
        if (b >= e) continue;
        // psi_hat_I(x) = 2^{k/2} psi_hat(2^k x - j) evaluated via the argument
        // transform, then scaled.
        std::vector<double> args(e - b);
        for (std::size_t i = b; i < e; ++i)
            args[i - b] = std::ldexp(xs[i], t.interval.k) - static_cast<double>(t.interval.j);
        std::vector<double> vals(args.size());
        parallel_chunks(args.size(), [&](std::size_t cb, std::size_t ce) {
            ev.eval(std::span<const double>(args.data() + cb, ce - cb), vals.data() + cb);
        });
        double e_inf = 0.0, e_l2 = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            double hat = amp * vals[i - b];
            double ref = amp * built.psi_ref.eval(args[i - b]);
            rows[ti][i] = hat;
            double d = std::abs(hat - ref);
            e_inf = std::max(e_inf, d);
            e_l2 += d * d;
        }
        e_l2 = std::sqrt(grid_step * e_l2);
        rep.per_wavelet_linf = std::max(rep.per_wavelet_linf, e_inf);
        rep.per_wavelet_l2 = std::max(rep.per_wavelet_l2, e_l2);
    }

    // S - S_hat pointwise from the same rows (the assembled network computes
    // the identical sum; see the spot check below).
    double l2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double d = 0.0;
        for (std::size_t ti = 0; ti < terms.size(); ++ti) {
            const auto& t = terms[ti];
            double amp = std::sqrt(std::ldexp(1.0, t.interval.k));
            double arg = std::ldexp(xs[i], t.interval.k) - static_cast<double>(t.interval.j);
            double ref = amp * built.psi_ref.eval(arg);
            d += t.coeff * (rows[ti][i] - ref);
        }
        diff[i] = d;
        rep.linf_error = std::max(rep.linf_error, std::abs(d));
        l2 += d * d;
    }
    rep.l2_error = std::sqrt(grid_step * l2);

    // Assemble the actual sum network for the parameter count and spot-check
    // it against the per-term evaluation path (including points outside the
    // per-term windows, where the rows assume exact zeros).
    {
        std::vector<ReluNet> nets;
        std::vector<double> bounds;
        for (const auto& t : terms) {
            double amp = std::sqrt(std::ldexp(1.0, t.interval.k));
            ReluNet ni = scale_output(
                input_affine(built.psi_net, std::ldexp(1.0, t.interval.k),
                             static_cast<double>(t.interval.j)),
                t.coeff * amp);
            ni.set_domain(glo, ghi);
            nets.push_back(std::move(ni));
            bounds.push_back(std::abs(t.coeff) * amp * built.psi_bound);
        }
        ReluNet sum = lower(sum_nets(nets, bounds));
        rep.param_count = size_report(sum).params;
        BatchEvaluator sev(sum);
        std::size_t probes = std::min<std::size_t>(64, count);
        std::vector<double> px(probes), pv(probes);
        for (std::size_t i = 0; i < probes; ++i) px[i] = xs[count * i / probes];
        sev.eval(px, pv.data());
        for (std::size_t i = 0; i < probes; ++i) {
            std::size_t gi = count * i / probes;
            double rowsum = 0.0;
            for (std::size_t ti = 0; ti < terms.size(); ++ti)
                rowsum += terms[ti].coeff * rows[ti][gi];
            rep.assembly_dev = std::max(rep.assembly_dev, std::abs(pv[i] - rowsum));
        }
    }

    double slack = 1e-12;
    rep.bound_ok = rep.linf_error <= rep.coeff_abs_sum * rep.per_wavelet_linf + slack &&
                   rep.l2_error <= rep.coeff_abs_sum * rep.per_wavelet_l2 + slack;
    return rep;
}

}  // namespace relucc
