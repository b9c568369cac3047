#include "relucc/relu_net.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace relucc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Compensated dot product: exact FMA product errors plus Neumaier summation.
// Keeps pass-through arithmetic faithful even when terms are many orders of
// magnitude larger than the result (steep-slope gadget nets cancel heavily).
double dot_comp(const Matrix& w, std::size_t row, std::span<const double> x, double bias) {
    double sum = bias, comp = 0.0;
    const double* wr = &w.a[row * w.cols];
    for (std::size_t j = 0; j < w.cols; ++j) {
        double p = wr[j] * x[j];
        double perr = std::fma(wr[j], x[j], -p);
        double t = sum + p;
        if (std::abs(sum) >= std::abs(p))
            comp += (sum - t) + p;
        else
            comp += (p - t) + sum;
        sum = t;
        comp += perr;
    }
    return sum + comp;
}

}  // namespace

Layer::Layer(Matrix w, std::vector<double> b, Act uniform)
    : W(std::move(w)), bias(std::move(b)) {
    if (W.rows != bias.size()) throw std::invalid_argument("Layer: weights/bias row mismatch");
    act.assign(W.rows, uniform);
    bound.assign(W.rows, kNaN);
}

bool Layer::all_identity() const {
    return std::all_of(act.begin(), act.end(), [](Act a) { return a == Act::Identity; });
}

bool Layer::all_relu() const {
    return std::all_of(act.begin(), act.end(), [](Act a) { return a == Act::Relu; });
}

ReluNet::ReluNet(std::vector<Layer> layers, double domain_lo, double domain_hi)
    : layers_(std::move(layers)), lo_(domain_lo), hi_(domain_hi) {
    if (layers_.empty()) throw std::invalid_argument("ReluNet: need at least one layer");
    for (auto& l : layers_) {
        if (l.W.rows != l.bias.size() || l.W.rows != l.act.size())
            throw std::invalid_argument("ReluNet: inconsistent layer");
        if (l.bound.empty()) l.bound.assign(l.W.rows, kNaN);
        if (l.bound.size() != l.W.rows) throw std::invalid_argument("ReluNet: bad bound vector");
    }
    for (std::size_t i = 1; i < layers_.size(); ++i)
        if (layers_[i].in_dim() != layers_[i - 1].out_dim())
            throw std::invalid_argument("ReluNet: layer dimensions do not chain");
    in_ = static_cast<int>(layers_.front().in_dim());
    out_ = static_cast<int>(layers_.back().out_dim());
}

void ReluNet::set_domain(double lo, double hi) {
    lo_ = lo;
    hi_ = hi;
}

std::vector<double> ReluNet::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_)
        throw std::invalid_argument("ReluNet::forward: input dimension mismatch");
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const auto& l : layers_) {
        next.assign(l.out_dim(), 0.0);
        for (std::size_t i = 0; i < l.out_dim(); ++i) {
            double v = dot_comp(l.W, i, cur, l.bias[i]);
            next[i] = (l.act[i] == Act::Relu && v < 0.0) ? 0.0 : v;
        }
        cur.swap(next);
    }
    return cur;
}

double ReluNet::forward1(double x) const {
    if (in_ != 1 || out_ != 1)
        throw std::invalid_argument("ReluNet::forward1: not a scalar network");
    return forward(std::span<const double>(&x, 1))[0];
}

SizeReport size_report(const ReluNet& net) {
    SizeReport r;
    const auto& ls = net.layers();
    std::size_t hidden = ls.size() - (ls.back().all_identity() ? 1u : 0u);
    for (std::size_t i = 0; i < hidden; ++i)
        r.width = std::max(r.width, static_cast<int>(ls[i].out_dim()));
    r.depth = static_cast<int>(hidden);
    for (const auto& l : ls)
        r.params += static_cast<long>(l.W.a.size() + l.bias.size());
    return r;
}

ReluNet with_readout(const ReluNet& net) {
    if (net.has_readout()) return net;
    auto layers = net.layers();
    std::size_t d = layers.back().out_dim();
    layers.emplace_back(Matrix::identity(d), std::vector<double>(d, 0.0), Act::Identity);
    return ReluNet(std::move(layers), net.domain_lo(), net.domain_hi());
}

namespace {

// Merges an affine readout into the following layer: act(W2 (R x + r) + b2)
// = act((W2 R) x + (W2 r + b2)).
Layer merge_affine(const Layer& readout, const Layer& next) {
    Layer m;
    m.W = next.W.matmul(readout.W);
    m.bias = next.W.matvec(readout.bias);
    for (std::size_t i = 0; i < m.bias.size(); ++i) m.bias[i] += next.bias[i];
    m.act = next.act;
    m.bound = next.bound;
    return m;
}

Layer block_diag(const Layer& a, const Layer& b, bool share_input) {
    Layer l;
    std::size_t rows = a.out_dim() + b.out_dim();
    std::size_t cols = share_input ? a.in_dim() : a.in_dim() + b.in_dim();
    l.W = Matrix(rows, cols);
    for (std::size_t i = 0; i < a.out_dim(); ++i)
        for (std::size_t j = 0; j < a.in_dim(); ++j) l.W(i, j) = a.W(i, j);
    std::size_t coff = share_input ? 0 : a.in_dim();
    for (std::size_t i = 0; i < b.out_dim(); ++i)
        for (std::size_t j = 0; j < b.in_dim(); ++j) l.W(a.out_dim() + i, coff + j) = b.W(i, j);
    l.bias = a.bias;
    l.bias.insert(l.bias.end(), b.bias.begin(), b.bias.end());
    l.act = a.act;
    l.act.insert(l.act.end(), b.act.begin(), b.act.end());
    l.bound = a.bound;
    l.bound.insert(l.bound.end(), b.bound.begin(), b.bound.end());
    return l;
}

}  // namespace

ReluNet compose(const ReluNet& f, const ReluNet& g) {
    if (g.output_dim() != f.input_dim())
        throw std::invalid_argument("compose: g output dim != f input dim");
    std::vector<Layer> layers(g.layers().begin(), g.layers().end());
    if (layers.back().all_identity()) {
        Layer readout = std::move(layers.back());
        layers.pop_back();
        layers.push_back(merge_affine(readout, f.layers().front()));
        layers.insert(layers.end(), f.layers().begin() + 1, f.layers().end());
    } else {
        layers.insert(layers.end(), f.layers().begin(), f.layers().end());
    }
    return ReluNet(std::move(layers), g.domain_lo(), g.domain_hi());
}

ReluNet pad_depth(const ReluNet& net, int target_depth) {
    SizeReport r = size_report(net);
    if (target_depth < r.depth) throw std::invalid_argument("pad_depth: target below current");
    ReluNet out = with_readout(net);
    auto layers = out.layers();
    std::size_t d = layers.back().in_dim();
    for (int k = r.depth; k < target_depth; ++k) {
        Layer pass(Matrix::identity(d), std::vector<double>(d, 0.0), Act::Identity);
        layers.insert(layers.end() - 1, std::move(pass));
    }
    return ReluNet(std::move(layers), net.domain_lo(), net.domain_hi());
}

namespace {

ReluNet stack_impl(const ReluNet& fa, const ReluNet& fb, bool share_input) {
    int da = size_report(fa).depth, db = size_report(fb).depth;
    ReluNet a = with_readout(da < db ? pad_depth(fa, db) : fa);
    ReluNet b = with_readout(db < da ? pad_depth(fb, da) : fb);
    std::vector<Layer> layers;
    layers.reserve(a.layers().size());
    for (std::size_t i = 0; i < a.layers().size(); ++i)
        layers.push_back(block_diag(a.layers()[i], b.layers()[i], share_input && i == 0));
    double lo = std::max(a.domain_lo(), b.domain_lo());
    double hi = std::min(a.domain_hi(), b.domain_hi());
    return ReluNet(std::move(layers), lo, hi);
}

}  // namespace

ReluNet stack(const ReluNet& f, const ReluNet& g) {
    if (f.input_dim() != g.input_dim())
        throw std::invalid_argument("stack: input dimensions differ");
    return stack_impl(f, g, true);
}

ReluNet stack_parallel(const ReluNet& f, const ReluNet& g) { return stack_impl(f, g, false); }

ReluNet sum_nets(const std::vector<ReluNet>& nets, const std::vector<double>& out_bounds) {
    if (nets.empty()) throw std::invalid_argument("sum_nets: empty sequence");
    if (!out_bounds.empty() && out_bounds.size() != nets.size())
        throw std::invalid_argument("sum_nets: bounds size mismatch");
    for (const auto& n : nets)
        if (n.input_dim() != 1 || n.output_dim() != 1)
            throw std::invalid_argument("sum_nets: chain requires scalar-in/scalar-out nets");
    if (nets.size() == 1) return with_readout(nets[0]);

    double lo = nets[0].domain_lo(), hi = nets[0].domain_hi();
    for (const auto& n : nets) {
        lo = std::max(lo, n.domain_lo());
        hi = std::min(hi, n.domain_hi());
    }
    double xbound = std::max(std::abs(lo), std::abs(hi));

    std::size_t count = nets.size();
    std::vector<Layer> out;
    // Block j occupies the hidden layers of nets[j], with channel 0 forwarding
    // x (blocks before the last) and channel 1 (or 0 in the last block)
    // carrying the running sum once block 2 starts.
    double acc_bound = kNaN;
    for (std::size_t j = 0; j < count; ++j) {
        ReluNet nj = with_readout(nets[j]);
        if (nj.layers().size() < 2)
            throw std::invalid_argument("sum_nets: summands need at least one hidden layer");
        bool first = j == 0, last = j + 1 == count;
        std::size_t extra = (first || last) ? 1 : 2;  // [x] or [x, acc] or [acc]
        bool has_x = !last;
        for (std::size_t li = 0; li + 1 < nj.layers().size(); ++li) {
            const Layer& src = nj.layers()[li];
            Layer l;
            std::size_t rows = src.out_dim() + extra;
            std::size_t cols = (j == 0 && li == 0) ? 1 : out.back().out_dim();
            l.W = Matrix(rows, cols);
            l.bias.assign(rows, 0.0);
            l.act.assign(rows, Act::Identity);
            l.bound.assign(rows, kNaN);
            std::size_t node0 = extra;

            if (li == 0) {
                if (j == 0) {
                    // x channel reads the input; net rows read the input.
                    l.W(0, 0) = 1.0;
                    l.act[0] = Act::Identity;
                    l.bound[0] = xbound;
                    for (std::size_t r = 0; r < src.out_dim(); ++r) {
                        l.W(node0 + r, 0) = src.W(r, 0);
                        l.bias[node0 + r] = src.bias[r];
                        l.act[node0 + r] = src.act[r];
                        l.bound[node0 + r] = src.bound[r];
                    }
                } else {
                    // Previous block layout: [x, acc?] + prev hidden nodes.
                    std::size_t pextra = (j == 1) ? 1 : 2;
                    ReluNet prev = with_readout(nets[j - 1]);
                    const Layer& pread = prev.layers().back();
                    std::size_t c = 0;
                    if (has_x) {
                        l.W(c, 0) = 1.0;
                        l.bound[c] = xbound;
                        ++c;
                    }
                    // Accumulator: acc_prev (if any) plus previous readout.
                    {
                        if (j >= 2) l.W(c, 1) = 1.0;  // previous acc channel
                        for (std::size_t k = 0; k < pread.in_dim(); ++k)
                            l.W(c, pextra + k) = pread.W(0, k);
                        l.bias[c] = pread.bias[0];
                        double b_prev = out_bounds.empty() ? kNaN : out_bounds[j - 1];
                        acc_bound = (j == 1) ? b_prev
                                             : (std::isnan(acc_bound) || std::isnan(b_prev)
                                                    ? kNaN
                                                    : acc_bound + b_prev);
                        l.bound[c] = acc_bound;
                        ++c;
                    }
                    for (std::size_t r = 0; r < src.out_dim(); ++r) {
                        l.W(node0 + r, 0) = src.W(r, 0);  // consume x channel
                        l.bias[node0 + r] = src.bias[r];
                        l.act[node0 + r] = src.act[r];
                        l.bound[node0 + r] = src.bound[r];
                    }
                }
            } else {
                // Interior layer of block j: forward the extra channels.
                for (std::size_t c = 0; c < extra; ++c) {
                    l.W(c, c) = 1.0;
                    l.bound[c] = (has_x && c == 0) ? xbound : acc_bound;
                }
                for (std::size_t r = 0; r < src.out_dim(); ++r) {
                    for (std::size_t k = 0; k < src.in_dim(); ++k)
                        l.W(node0 + r, extra + k) = src.W(r, k);
                    l.bias[node0 + r] = src.bias[r];
                    l.act[node0 + r] = src.act[r];
                    l.bound[node0 + r] = src.bound[r];
                }
            }
            out.push_back(std::move(l));
        }
    }
    // Readout: acc + last readout.
    {
        ReluNet lastn = with_readout(nets.back());
        const Layer& lread = lastn.layers().back();
        Layer l;
        l.W = Matrix(1, out.back().out_dim());
        l.W(0, 0) = 1.0;  // acc channel of the last block
        for (std::size_t k = 0; k < lread.in_dim(); ++k) l.W(0, 1 + k) = lread.W(0, k);
        l.bias = {lread.bias[0]};
        l.act = {Act::Identity};
        l.bound = {kNaN};
        out.push_back(std::move(l));
    }
    return ReluNet(std::move(out), lo, hi);
}

ReluNet pad(const ReluNet& net, int target_width, int target_depth) {
    SizeReport r = size_report(net);
    if (target_width < r.width || target_depth < r.depth)
        throw std::invalid_argument("pad: target below current size");
    ReluNet base = pad_depth(net, target_depth);
    auto layers = base.layers();
    // Widen every hidden layer with inert zero nodes; the consumer layer
    // gains matching zero columns.
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        std::size_t cur = layers[i].out_dim();
        std::size_t want = static_cast<std::size_t>(target_width);
        if (cur >= want) continue;
        Matrix w(want, layers[i].in_dim());
        for (std::size_t rr = 0; rr < cur; ++rr)
            for (std::size_t cc = 0; cc < layers[i].in_dim(); ++cc)
                w(rr, cc) = layers[i].W(rr, cc);
        layers[i].W = std::move(w);
        layers[i].bias.resize(want, 0.0);
        layers[i].act.resize(want, Act::Relu);
        layers[i].bound.resize(want, 0.0);
        Matrix nw(layers[i + 1].out_dim(), want);
        for (std::size_t rr = 0; rr < layers[i + 1].out_dim(); ++rr)
            for (std::size_t cc = 0; cc < cur; ++cc) nw(rr, cc) = layers[i + 1].W(rr, cc);
        layers[i + 1].W = std::move(nw);
    }
    return ReluNet(std::move(layers), net.domain_lo(), net.domain_hi());
}

namespace {

struct Interval {
    double lo, hi;
};

}  // namespace

ReluNet lower(const ReluNet& net) {
    auto layers = net.layers();
    bool has_read = layers.back().all_identity();
    std::size_t hidden = layers.size() - (has_read ? 1u : 0u);

    std::vector<Interval> in(static_cast<std::size_t>(net.input_dim()),
                             {net.domain_lo(), net.domain_hi()});
    for (std::size_t li = 0; li < hidden; ++li) {
        Layer& l = layers[li];
        std::vector<Interval> out(l.out_dim());
        std::vector<double> shift(l.out_dim(), 0.0);
        bool any_shift = false;
        for (std::size_t i = 0; i < l.out_dim(); ++i) {
            double lo = l.bias[i], hi = l.bias[i];
            for (std::size_t j = 0; j < l.in_dim(); ++j) {
                double w = l.W(i, j);
                if (w == 0.0) continue;
                double a = w * in[j].lo, b = w * in[j].hi;
                lo += std::min(a, b);
                hi += std::max(a, b);
            }
            if (l.act[i] == Act::Relu) {
                lo = std::max(lo, 0.0);
                hi = std::max(hi, 0.0);
            }
            // Declared bounds are construction invariants; trust them for
            // downstream propagation.
            if (!std::isnan(l.bound[i])) {
                lo = std::max(lo, -l.bound[i]);
                hi = std::min(hi, l.bound[i]);
                if (l.act[i] == Act::Relu) lo = std::max(lo, 0.0);
            }
            out[i] = {lo, hi};
            if (l.act[i] == Act::Identity) {
                if (lo >= 0.0) {
                    l.act[i] = Act::Relu;  // already non-negative, exact
                } else {
                    double b = !std::isnan(l.bound[i]) ? l.bound[i]
                                                       : std::max(std::abs(lo), std::abs(hi));
                    if (!std::isfinite(b))
                        throw std::invalid_argument("lower: unbounded channel on declared domain");
                    shift[i] = 2.0 * b;
                    any_shift = true;
                    l.act[i] = Act::Relu;
                    l.bias[i] += shift[i];
                }
            }
        }
        if (any_shift) {
            if (li + 1 >= layers.size())
                throw std::invalid_argument("lower: negative channel in the final layer");
            Layer& nxt = layers[li + 1];
            for (std::size_t r = 0; r < nxt.out_dim(); ++r) {
                double corr = 0.0;
                for (std::size_t c = 0; c < nxt.in_dim(); ++c)
                    if (shift[c] != 0.0) corr += nxt.W(r, c) * shift[c];
                nxt.bias[r] -= corr;
            }
        }
        in = std::move(out);
    }
    return ReluNet(std::move(layers), net.domain_lo(), net.domain_hi());
}

ReluNet net_from_cpwl(const CPwL& f, double domain_lo, double domain_hi) {
    const auto& bp = f.breakpoints();
    const auto& v = f.values();
    std::size_t m = bp.size();
    Matrix w1(m, 1);
    std::vector<double> b1(m);
    for (std::size_t i = 0; i < m; ++i) {
        w1(i, 0) = 1.0;
        b1[i] = -bp[i];
    }
    Matrix w2(1, m);
    double prev_slope = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double slope = (i + 1 < m) ? (v[i + 1] - v[i]) / (bp[i + 1] - bp[i]) : 0.0;
        w2(0, i) = slope - prev_slope;
        prev_slope = slope;
    }
    std::vector<Layer> layers;
    layers.emplace_back(std::move(w1), std::move(b1), Act::Relu);
    layers.emplace_back(std::move(w2), std::vector<double>{v[0]}, Act::Identity);
    return ReluNet(std::move(layers), domain_lo, domain_hi);
}

ReluNet input_affine(const ReluNet& net, double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("input_affine: dilation factor must be positive");
    auto layers = net.layers();
    Layer& l0 = layers.front();
    for (std::size_t i = 0; i < l0.out_dim(); ++i) {
        double wsum = 0.0;
        for (std::size_t j = 0; j < l0.in_dim(); ++j) {
            wsum += l0.W(i, j) * b;
            l0.W(i, j) *= a;
        }
        l0.bias[i] -= wsum;
    }
    double lo = (net.domain_lo() + b) / a, hi = (net.domain_hi() + b) / a;
    return ReluNet(std::move(layers), lo, hi);
}

ReluNet scale_output(const ReluNet& net, double a) {
    ReluNet out = with_readout(net);
    auto layers = out.layers();
    Layer& r = layers.back();
    for (double& w : r.W.a) w *= a;
    for (double& b : r.bias) b *= a;
    return ReluNet(std::move(layers), net.domain_lo(), net.domain_hi());
}

BatchEvaluator::BatchEvaluator(const ReluNet& net) : out_(net.output_dim()) {
    if (net.input_dim() != 1)
        throw std::invalid_argument("BatchEvaluator: scalar-input networks only");
    layers_.reserve(net.layers().size());
    max_width_ = 1;
    for (const auto& l : net.layers()) {
        std::vector<Row> rows(l.out_dim());
        for (std::size_t i = 0; i < l.out_dim(); ++i) {
            Row& r = rows[i];
            r.bias = l.bias[i];
            r.act = l.act[i];
            for (std::size_t j = 0; j < l.in_dim(); ++j) {
                double w = l.W(i, j);
                if (w != 0.0) {
                    r.idx.push_back(static_cast<std::uint32_t>(j));
                    r.w.push_back(w);
                }
            }
        }
        max_width_ = std::max(max_width_, l.out_dim());
        layers_.push_back(std::move(rows));
    }
}

void BatchEvaluator::eval(std::span<const double> xs, double* out) const {
    constexpr std::size_t B = 64;
    std::vector<double> buf_a(max_width_ * B), buf_b(max_width_ * B);
    for (std::size_t start = 0; start < xs.size(); start += B) {
        std::size_t nb = std::min(B, xs.size() - start);
        double* cur = buf_a.data();
        double* nxt = buf_b.data();
        for (std::size_t b = 0; b < nb; ++b) cur[b] = xs[start + b];
        for (const auto& rows : layers_) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const Row& r = rows[i];
                double* dst = nxt + i * B;
                for (std::size_t b = 0; b < nb; ++b) dst[b] = r.bias;
                for (std::size_t k = 0; k < r.idx.size(); ++k) {
                    const double w = r.w[k];
                    const double* src = cur + r.idx[k] * B;
                    for (std::size_t b = 0; b < nb; ++b) dst[b] += w * src[b];
                }
                if (r.act == Act::Relu)
                    for (std::size_t b = 0; b < nb; ++b) dst[b] = dst[b] < 0.0 ? 0.0 : dst[b];
            }
            std::swap(cur, nxt);
        }
        for (std::size_t b = 0; b < nb; ++b)
            for (int o = 0; o < out_; ++o)
                out[(start + b) * static_cast<std::size_t>(out_) + static_cast<std::size_t>(o)] =
                    cur[static_cast<std::size_t>(o) * B + b];
    }
}

std::vector<double> BatchEvaluator::eval(std::span<const double> xs) const {
    std::vector<double> out(xs.size() * static_cast<std::size_t>(out_));
    eval(xs, out.data());
    return out;
}

void parallel_chunks(std::size_t total, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    constexpr std::size_t kChunks = 64;
    std::size_t nchunks = std::min(kChunks, total);
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t nthreads = std::min<std::size_t>(hw, nchunks);
    if (nthreads <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) {
            std::size_t b = total * c / nchunks, e = total * (c + 1) / nchunks;
            if (b < e) fn(b, e);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= nchunks) return;
                std::size_t b = total * c / nchunks, e = total * (c + 1) / nchunks;
                if (b < e) fn(b, e);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace relucc
