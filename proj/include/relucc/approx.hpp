#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relucc/compiler.hpp"
#include "relucc/cpwl.hpp"
#include "relucc/mask.hpp"
#include "relucc/relu_net.hpp"

namespace relucc {

struct ConvergenceRecord {
    int n = 0;
    double error = 0.0;
    int width = 0;
    int depth = 0;
    long params = 0;
};

struct ConvergenceRun {
    std::string mask_name;
    std::string seed_desc;
    std::vector<ConvergenceRecord> records;
    double fitted_lambda = 0.0;
    int ref_level = 0;      // oracle iterate used as the reference
    double grid_step = 0.0;
};

/// Compiles V^n phi0 for n = 1..n_max and measures the grid sup distance of
/// each network to the exact oracle iterate V^{n_max + ref_extra} phi0,
/// fitting a geometric rate to the errors.
ConvergenceRun approximate_phi(const Mask& mask, const CPwL& phi0, int n_max, int ref_extra,
                               const CompileOptions& opts = {},
                               double grid_step = 1.0 / 4096.0);

/// CSV with header n,error,width,depth,params.
std::string convergence_csv(const ConvergenceRun& run);

/// Summary JSON carrying the fitted rate and run metadata.
std::string convergence_summary_json(const ConvergenceRun& run);

/// Network for psi_hat(x) = sum_q coeff_q phi_hat(dilation * x - shift_q).
/// `phi_bound` is a sup bound of |phi_hat| on its domain (for the
/// accumulator lowering); combo must be nonempty.
ReluNet build_wavelet(const ReluNet& phi_net, const std::vector<std::pair<double, double>>& combo,
                      double dilation, double phi_bound);

/// Exact CPwL counterpart built from a reference iterate of phi.
CPwL wavelet_cpwl(const CPwL& phi_ref, const std::vector<std::pair<double, double>>& combo,
                  double dilation);

/// The standard quadrature-mirror combination (coeff_j = (-1)^j c_{1-j});
/// its coefficients come from the classical wavelet construction, and only
/// triangle-inequality properties of the result are relied upon here.
std::vector<std::pair<double, double>> qmf_combo(const Mask& mask);

/// Dyadic interval [j, j+1] 2^{-k}.
struct DyadicInterval {
    long j = 0;
    int k = 0;
    double lo() const;
    double hi() const;
};

/// Checked construction from endpoints; throws when [lo, hi] is not of the
/// form [j, j+1] 2^{-k}.
DyadicInterval dyadic_interval(double lo, double hi);

struct NTermTerm {
    DyadicInterval interval;
    double coeff = 0.0;
};

/// A wavelet system built from a mask: psi = sum_q combo_q phi(dilation x -
/// shift_q), with phi approximated at a chosen compile level and referenced
/// by a deep oracle iterate.
struct WaveletFactory {
    Mask mask;
    CPwL phi0;
    std::vector<std::pair<double, double>> combo;
    double dilation = 2.0;
    int ref_extra = 4;
    CompileOptions opts;

    struct Built {
        CPwL psi_ref;
        ReluNet psi_net;
        double psi_bound;  // sup bound used for accumulator lowering
    };
    Built build(int level) const;
};

struct NTermReport {
    double linf_error = 0.0;
    double l2_error = 0.0;
    double coeff_abs_sum = 0.0;
    double per_wavelet_linf = 0.0;  // max over the used intervals
    double per_wavelet_l2 = 0.0;
    long param_count = 0;
    double assembly_dev = 0.0;  // assembled net vs per-term sums, spot-checked
    bool bound_ok = false;
    double grid_step = 0.0;
};

/// Replaces each normalized wavelet psi_I = 2^{k/2} psi(2^k x - j) in
/// S = sum f_I psi_I by its network surrogate and measures ||S - S_hat||
/// (discrete sup and L2 norms on a fine grid) against the triangle-inequality
/// budget (sum |f_I|) * (per-wavelet error).
NTermReport nterm_demo(const std::vector<NTermTerm>& terms, const WaveletFactory& factory,
                       int level, double grid_step = 1.0 / 4096.0);

}  // namespace relucc
