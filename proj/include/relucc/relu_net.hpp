#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relucc/cpwl.hpp"
#include "relucc/matrix.hpp"

namespace relucc {

enum class Act : std::uint8_t { Relu, Identity };

/// One affine stage y = act(W x + b).  Activations are tracked per channel:
/// constructions routinely mix ReLU nodes with pass-through channels, and the
/// lowering pass turns the latter into ReLU nodes afterwards.  `bound` may
/// declare a known sup bound |value| <= bound[i] for a channel; lowering uses
/// it instead of interval propagation where present (NaN = undeclared).
struct Layer {
    Matrix W;
    std::vector<double> bias;
    std::vector<Act> act;
    std::vector<double> bound;

    Layer() = default;
    Layer(Matrix w, std::vector<double> b, Act uniform);

    std::size_t in_dim() const { return W.cols; }
    std::size_t out_dim() const { return W.rows; }
    bool all_identity() const;
    bool all_relu() const;
};

struct SizeReport {
    int width = 0;
    int depth = 0;
    long params = 0;
};

/// Layered ReLU network.  The final layer is normally an affine readout
/// (all-identity); depth counts the remaining (hidden) layers and width is
/// the widest hidden layer.  `domain` is the input interval on which
/// exactness guarantees (and lowering bounds) hold; evaluation itself is
/// defined everywhere.
class ReluNet {
public:
    ReluNet(std::vector<Layer> layers, double domain_lo, double domain_hi);

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    int input_dim() const { return in_; }
    int output_dim() const { return out_; }
    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }
    void set_domain(double lo, double hi);

    bool has_readout() const { return layers_.back().all_identity(); }

    std::vector<double> forward(std::span<const double> x) const;
    double forward1(double x) const;  // scalar in/out convenience

private:
    std::vector<Layer> layers_;
    int in_ = 0;
    int out_ = 0;
    double lo_ = 0.0;
    double hi_ = 1.0;
};

SizeReport size_report(const ReluNet& net);

/// f after g: the resulting network computes f(g(x)) exactly; depths add.
ReluNet compose(const ReluNet& f, const ReluNet& g);

/// Shared-input stack: x |-> (f(x), g(x)).  Depths are equalized with
/// pass-through padding; widths add.
ReluNet stack(const ReluNet& f, const ReluNet& g);

/// Separate-input stack: (x, y) |-> (f(x), g(y)); input dims add.
ReluNet stack_parallel(const ReluNet& f, const ReluNet& g);

/// Chain computing sum_j nets[j](x) for scalar-in/scalar-out nets, using one
/// input-forward channel and one accumulator channel; width is
/// max width + 2 and depths add.  `out_bounds`, when provided, declares sup
/// bounds of each summand on the domain (used to bound the accumulator for
/// lowering).
ReluNet sum_nets(const std::vector<ReluNet>& nets, const std::vector<double>& out_bounds = {});

/// Width/depth padding with inert zero nodes and pass-through layers; the
/// computed function is unchanged.
ReluNet pad(const ReluNet& net, int target_width, int target_depth);

/// Pass-through layers appended before the readout until depth == target.
ReluNet pad_depth(const ReluNet& net, int target_depth);

/// Rewrites every hidden pass-through channel as a ReLU node, adding a bias
/// shift (subtracted downstream) when the channel can be negative on the
/// declared domain.  Channel ranges come from declared bounds where present
/// and interval propagation otherwise; throws if a channel cannot be bounded.
ReluNet lower(const ReluNet& net);

/// Width-m, depth-1 realization of a CPwL function with m breakpoints:
/// f(x) = f(b_1) + sum_i (s_i - s_{i-1}) relu(x - b_i).
ReluNet net_from_cpwl(const CPwL& f, double domain_lo = 0.0, double domain_hi = 1.0);

/// x |-> net(a * x - b) (a > 0); the first layer and domain absorb the map.
ReluNet input_affine(const ReluNet& net, double a, double b);

/// x |-> a * net(x); scales the readout.
ReluNet scale_output(const ReluNet& net, double a);

/// Appends an identity readout if the net ends with an activated layer.
ReluNet with_readout(const ReluNet& net);

/// Batched evaluation of a scalar-input network on many points, exploiting
/// row sparsity.  Results are written per point with stride output_dim.
class BatchEvaluator {
public:
    explicit BatchEvaluator(const ReluNet& net);

    /// out must hold xs.size() * output_dim doubles.
    void eval(std::span<const double> xs, double* out) const;

    std::vector<double> eval(std::span<const double> xs) const;

private:
    struct Row {
        std::vector<std::uint32_t> idx;
        std::vector<double> w;
        double bias;
        Act act;
    };
    std::vector<std::vector<Row>> layers_;
    int out_ = 0;
    std::size_t max_width_ = 0;
};

/// Runs fn(begin, end) over [0, total) split into a fixed number of chunks,
/// possibly on several threads.  Chunk boundaries do not depend on the
/// thread count, so any chunk-indexed output is deterministic.
void parallel_chunks(std::size_t total, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace relucc
