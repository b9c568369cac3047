#pragma once

#include <string>
#include <vector>

#include "relucc/cascade.hpp"
#include "relucc/cpwl.hpp"
#include "relucc/gadgets.hpp"
#include "relucc/mask.hpp"
#include "relucc/relu_net.hpp"

namespace relucc {

enum class CompileStage { SpecialGRn, Coordinate, SpecialVn, GeneralVn };

std::string to_string(CompileStage s);

/// A compiled network together with the size bounds its construction
/// guarantees; size_report(net) must stay within them.
struct CompileArtifact {
    ReluNet net;
    GadgetParams params;
    int width_bound = 0;
    int depth_bound = 0;
    CompileStage stage = CompileStage::GeneralVn;
};

struct CompileOptions {
    bool tight_m = false;      // measure the product bound from the oracle
    bool depth_heavy = false;  // chain the coordinate nets instead of stacking
    bool lower_net = true;     // run the lowering pass on the result
};

/// Network computing g(R^n(x)) on the whole line for special g with m
/// breakpoints, built as the min of the two smoothed compositions.
/// Width <= 2 max{m, 5}, depth <= n + 2.
CompileArtifact compile_g_of_Rn(const CPwL& g, int n, const GadgetParams& params);

/// Network computing the k-th unit translate of V^n g on [0, 1] (that is,
/// x |-> (V^n g)(x + k - 1)) for special g.  Width
/// <= max{1 + 2 max{m,5}, N + 10, 4N + 3}, depth <= 4n + 1.
CompileArtifact compile_coordinate(const CPwL& g, int k, int n, const Mask& mask,
                                   const GadgetParams& params);

/// Network computing V^n g on the whole line for special g: a ramp bank in
/// front of the N stacked coordinate networks.  Width <= N W, depth 4n + 2.
CompileArtifact compile_Vn_special(const CPwL& g, int n, const Mask& mask,
                                   const GadgetParams& params, const CompileOptions& opts = {});

/// Network computing V^n g0 for any CPwL g0 supported on [0, N]: g0 is
/// decomposed into grid hats, one special network is compiled and its
/// shifted, scaled copies are chained into a sum.  Special seeds dispatch to
/// compile_Vn_special directly.
CompileArtifact compile_Vn(const CPwL& g0, int n, const Mask& mask,
                           const CompileOptions& opts = {});

/// The (width, depth) bounds and stage compile_Vn would declare, without
/// building anything.
struct ExpectedBounds {
    int width_bound = 0;
    int depth_bound = 0;
    CompileStage stage = CompileStage::GeneralVn;
};

ExpectedBounds expected_bounds(const CPwL& g0, int n, const Mask& mask,
                               const CompileOptions& opts = {});

struct Report {
    double max_dev = 0.0;
    double mean_dev = 0.0;
    int width = 0;
    int depth = 0;
    long params = 0;
    bool bounds_ok = false;

    bool ok(double tol) const { return bounds_ok && max_dev <= tol; }
};

/// Grid comparison of the compiled network against the exact cascade oracle
/// over [-1, N+1] plus the size-bound check.  Failures are recorded in the
/// report, never thrown.
Report verify(const CompileArtifact& artifact, const Mask& mask, const CPwL& g, int n,
              double grid_step, double tol);

/// Same comparison for a bare network with externally supplied bounds.
Report verify_net(const ReluNet& net, int width_bound, int depth_bound, const Mask& mask,
                  const CPwL& g, int n, double grid_step, double tol);

/// Reference evaluation of the smoothed matrix recursion (the arithmetic the
/// compiled blocks perform) without building any layers: starting from
/// F^0 = g(R^n(x)) e_k, applies n steps of
///   F^j = Pi(chi_lo(Rhat^{j-1}), T0^T F^{j-1}) + Pi(chi_hi(Rhat^{j-1}), T1^T F^{j-1}).
/// Returns F^n; its first entry is the k-th coordinate value.
std::vector<double> modified_coordinate_eval(const CPwL& g, int k, int n, const Mask& mask,
                                             const GadgetParams& params, double x);

/// Product bound measured from exact transfer-matrix products on the dyadic
/// grid of step 2^{-n-4}, doubled for safety.
double tight_product_bound(const CPwL& g, int n, const Mask& mask);

/// Step used to re-grid a general seed so every hat translate is special:
/// 2^{-max(3, ceil(log2(1/gap_min)) + 3)} for gap_min the smallest
/// breakpoint gap.
double refinement_grid_step(const CPwL& g0);

}  // namespace relucc
