#include "ease/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace ease {

const char* primitive_name(Primitive kind) {
    switch (kind) {
        case Primitive::matmul: return "matmul";
        case Primitive::add: return "add";
        case Primitive::multiply: return "multiply";
        case Primitive::subtract: return "subtract";
        case Primitive::divide: return "divide";
        case Primitive::exp: return "exp";
        case Primitive::log: return "log";
        case Primitive::sigmoid: return "sigmoid";
        case Primitive::softmax_rows: return "softmax-rows";
        case Primitive::log_softmax_rows: return "log-softmax-rows";
        case Primitive::layer_norm: return "layer-norm";
        case Primitive::embedding_lookup: return "embedding-lookup";
        case Primitive::concat: return "concat";
        case Primitive::slice: return "slice";
        case Primitive::transpose: return "transpose";
        case Primitive::sum: return "sum";
        case Primitive::mean: return "mean";
        case Primitive::abs: return "abs";
        case Primitive::power: return "power";
        case Primitive::where_mask: return "where-mask";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// active tape bookkeeping
// ---------------------------------------------------------------------------

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Tape() {
    prev_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

NoGradGuard::NoGradGuard() {
    saved_ = g_active_tape;
    g_active_tape = nullptr;
}

NoGradGuard::~NoGradGuard() { g_active_tape = saved_; }

// ---------------------------------------------------------------------------
// broadcasting for elementwise binaries: equal shapes, scalar against
// anything, row [1,n] (or [n]) against [m,n], column [m,1] against [m,n]
// ---------------------------------------------------------------------------

namespace {

using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;

enum class Bcast { full, scalar, row, col };

struct BinaryPlan {
    Index rows = 0, cols = 0;
    Bcast a = Bcast::full, b = Bcast::full;
    Shape out_shape;
};

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                                shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
}

BinaryPlan classify_binary(const char* op, const Tensor& a, const Tensor& b) {
    const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
    BinaryPlan p;
    if (ar == br && ac == bc) {
        p = {ar, ac, Bcast::full, Bcast::full, a.rank() >= b.rank() ? a.shape() : b.shape()};
    } else if (a.size() == 1) {
        p = {br, bc, Bcast::scalar, Bcast::full, b.shape()};
    } else if (b.size() == 1) {
        p = {ar, ac, Bcast::full, Bcast::scalar, a.shape()};
    } else if (br == 1 && bc == ac) {
        p = {ar, ac, Bcast::full, Bcast::row, a.shape()};
    } else if (ar == 1 && ac == bc) {
        p = {br, bc, Bcast::row, Bcast::full, b.shape()};
    } else if (bc == 1 && br == ar) {
        p = {ar, ac, Bcast::full, Bcast::col, a.shape()};
    } else if (ac == 1 && ar == br) {
        p = {br, bc, Bcast::col, Bcast::full, b.shape()};
    } else {
        shape_fail(op, a, b);
    }
    return p;
}

RowMatrix expand(const Tensor& t, Index rows, Index cols, Bcast mode) {
    switch (mode) {
        case Bcast::full: return RowMatrix(t.mat());
        case Bcast::scalar: return RowMatrix::Constant(rows, cols, t.values()[0]);
        case Bcast::row: return RowMatrix(t.mat().replicate(rows, 1));
        case Bcast::col: return RowMatrix(t.mat().replicate(1, cols));
    }
    return {};
}

// reduce an output-shaped gradient contribution back onto an input
void accumulate(Tensor t, const RowMatrix& contrib, Bcast mode) {
    switch (mode) {
        case Bcast::full: t.grad_mat() += contrib; break;
        case Bcast::scalar: t.grad()[0] += contrib.sum(); break;
        case Bcast::row: t.grad_mat() += RowMatrix(contrib.colwise().sum()); break;
        case Bcast::col: t.grad_mat() += RowMatrix(contrib.rowwise().sum()); break;
    }
}

void check_arity(Primitive kind, const std::vector<Tensor>& inputs, size_t want) {
    if (inputs.size() != want)
        throw std::invalid_argument(std::string(primitive_name(kind)) + ": expected " +
                                    std::to_string(want) + " inputs, got " +
                                    std::to_string(inputs.size()));
    for (const auto& t : inputs)
        if (!t.defined())
            throw std::invalid_argument(std::string(primitive_name(kind)) + ": undefined input");
}

constexpr double k_log_floor = 1e-12;

struct SlicePlan {
    Index rb, re, cb, ce;
};

SlicePlan resolve_slice(const Tensor& x, const OpAttrs& attrs) {
    SlicePlan s{attrs.row_begin, attrs.row_end, attrs.col_begin, attrs.col_end};
    if (s.re < 0) s.re = x.rows();
    if (s.ce < 0) s.ce = x.cols();
    if (s.rb < 0 || s.rb > s.re || s.re > x.rows() || s.cb < 0 || s.cb > s.ce || s.ce > x.cols())
        throw std::invalid_argument("slice: range rows [" + std::to_string(s.rb) + "," +
                                    std::to_string(s.re) + ") cols [" + std::to_string(s.cb) + "," +
                                    std::to_string(s.ce) + ") outside shape " +
                                    shape_to_string(x.shape()));
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// forward kernels
// ---------------------------------------------------------------------------

Tensor apply_primitive(Primitive kind, const std::vector<Tensor>& inputs, const OpAttrs& attrs) {
    Tensor out;
    switch (kind) {
        case Primitive::matmul: {
            check_arity(kind, inputs, 2);
            const Tensor& a = inputs[0];
            const Tensor& b = inputs[1];
            if (a.cols() != b.rows()) shape_fail("matmul", a, b);
            out = Tensor::zeros({a.rows(), b.cols()});
            out.mat() = a.mat() * b.mat();
            break;
        }
        case Primitive::add:
        case Primitive::subtract:
        case Primitive::multiply:
        case Primitive::divide: {
            check_arity(kind, inputs, 2);
            const Tensor& a = inputs[0];
            const Tensor& b = inputs[1];
            if (kind == Primitive::divide && (b.values() == 0.0).any())
                throw std::domain_error("divide: division by zero");
            BinaryPlan p = classify_binary(primitive_name(kind), a, b);
            RowMatrix ae = expand(a, p.rows, p.cols, p.a);
            RowMatrix be = expand(b, p.rows, p.cols, p.b);
            out = Tensor::zeros(p.out_shape);
            switch (kind) {
                case Primitive::add: out.mat() = ae + be; break;
                case Primitive::subtract: out.mat() = ae - be; break;
                case Primitive::multiply: out.mat() = ae.cwiseProduct(be); break;
                default: out.mat() = ae.cwiseQuotient(be); break;
            }
            break;
        }
        case Primitive::exp: {
            check_arity(kind, inputs, 1);
            out = Tensor::zeros(inputs[0].shape());
            out.values() = inputs[0].values().exp();
            break;
        }
        case Primitive::log: {
            check_arity(kind, inputs, 1);
            if ((inputs[0].values() <= 0.0).any())
                throw std::domain_error("log: non-positive input");
            out = Tensor::zeros(inputs[0].shape());
            out.values() = inputs[0].values().max(k_log_floor).log();
            break;
        }
        case Primitive::sigmoid: {
            check_arity(kind, inputs, 1);
            out = Tensor::zeros(inputs[0].shape());
            // split by sign so neither exp can overflow
            const Array& x = inputs[0].values();
            out.values() =
                (x >= 0.0).select(1.0 / (1.0 + (-x).exp()), x.exp() / (1.0 + x.exp()));
            break;
        }
        case Primitive::softmax_rows:
        case Primitive::log_softmax_rows: {
            check_arity(kind, inputs, 1);
            const Tensor& x = inputs[0];
            out = Tensor::zeros(x.shape());
            auto xm = x.mat();
            auto om = out.mat();
            for (Index i = 0; i < x.rows(); ++i) {
                RowArray row = xm.row(i).array();
                row -= row.maxCoeff();
                if (kind == Primitive::softmax_rows) {
                    RowArray e = row.exp();
                    om.row(i) = (e / e.sum()).matrix();
                } else {
                    om.row(i) = (row - std::log(row.exp().sum())).matrix();
                }
            }
            break;
        }
        case Primitive::layer_norm: {
            check_arity(kind, inputs, 1);
            const Tensor& x = inputs[0];
            out = Tensor::zeros(x.shape());
            auto xm = x.mat();
            auto om = out.mat();
            for (Index i = 0; i < x.rows(); ++i) {
                RowArray row = xm.row(i).array();
                double mu = row.mean();
                double var = (row - mu).square().mean();
                om.row(i) = ((row - mu) / std::sqrt(var + attrs.eps)).matrix();
            }
            break;
        }
        case Primitive::embedding_lookup: {
            check_arity(kind, inputs, 1);
            const Tensor& table = inputs[0];
            if (attrs.ids.empty())
                throw std::invalid_argument("embedding-lookup: empty id list");
            for (Index id : attrs.ids)
                if (id < 0 || id >= table.rows())
                    throw std::invalid_argument("embedding-lookup: id " + std::to_string(id) +
                                                " outside table with " +
                                                std::to_string(table.rows()) + " rows");
            out = Tensor::zeros({static_cast<Index>(attrs.ids.size()), table.cols()});
            auto om = out.mat();
            auto tm = table.mat();
            for (size_t i = 0; i < attrs.ids.size(); ++i)
                om.row(static_cast<Index>(i)) = tm.row(attrs.ids[i]);
            break;
        }
        case Primitive::concat: {
            if (inputs.empty()) throw std::invalid_argument("concat: no inputs");
            for (const auto& t : inputs)
                if (!t.defined()) throw std::invalid_argument("concat: undefined input");
            if (attrs.axis != 0 && attrs.axis != 1)
                throw std::invalid_argument("concat: axis must be 0 or 1");
            Index rows = inputs[0].rows(), cols = inputs[0].cols();
            Index total = 0;
            for (const auto& t : inputs) {
                if (attrs.axis == 0) {
                    if (t.cols() != cols) shape_fail("concat", inputs[0], t);
                    total += t.rows();
                } else {
                    if (t.rows() != rows) shape_fail("concat", inputs[0], t);
                    total += t.cols();
                }
            }
            out = attrs.axis == 0 ? Tensor::zeros({total, cols}) : Tensor::zeros({rows, total});
            auto om = out.mat();
            Index at = 0;
            for (const auto& t : inputs) {
                if (attrs.axis == 0) {
                    om.middleRows(at, t.rows()) = t.mat();
                    at += t.rows();
                } else {
                    om.middleCols(at, t.cols()) = t.mat();
                    at += t.cols();
                }
            }
            break;
        }
        case Primitive::slice: {
            check_arity(kind, inputs, 1);
            const Tensor& x = inputs[0];
            SlicePlan s = resolve_slice(x, attrs);
            out = Tensor::zeros({s.re - s.rb, s.ce - s.cb});
            out.mat() = x.mat().block(s.rb, s.cb, s.re - s.rb, s.ce - s.cb);
            break;
        }
        case Primitive::transpose: {
            check_arity(kind, inputs, 1);
            out = Tensor::zeros({inputs[0].cols(), inputs[0].rows()});
            out.mat() = inputs[0].mat().transpose();
            break;
        }
        case Primitive::sum:
        case Primitive::mean: {
            check_arity(kind, inputs, 1);
            double s = inputs[0].values().sum();
            if (kind == Primitive::mean) s /= static_cast<double>(inputs[0].size());
            out = Tensor::scalar(s);
            break;
        }
        case Primitive::abs: {
            check_arity(kind, inputs, 1);
            out = Tensor::zeros(inputs[0].shape());
            out.values() = inputs[0].values().abs();
            break;
        }
        case Primitive::power: {
            check_arity(kind, inputs, 1);
            const Array& x = inputs[0].values();
            double p = attrs.exponent;
            bool integral = p == std::floor(p);
            if (!integral && (x < 0.0).any())
                throw std::domain_error("power: negative base with non-integer exponent");
            if (p < 0.0 && (x == 0.0).any())
                throw std::domain_error("power: zero base with negative exponent");
            out = Tensor::zeros(inputs[0].shape());
            out.values() = x.pow(p);
            break;
        }
        case Primitive::where_mask: {
            check_arity(kind, inputs, 3);
            const Tensor& m = inputs[0];
            const Tensor& a = inputs[1];
            const Tensor& b = inputs[2];
            if (m.rows() != a.rows() || m.cols() != a.cols()) shape_fail("where-mask", m, a);
            if (m.rows() != b.rows() || m.cols() != b.cols()) shape_fail("where-mask", m, b);
            out = Tensor::zeros(a.shape());
            out.values() = (m.values() != 0.0).select(a.values(), b.values());
            break;
        }
    }

    bool needs_grad = false;
    for (const auto& t : inputs) needs_grad = needs_grad || t.requires_grad();
    if (needs_grad) {
        if (Tape* tape = Tape::active()) {
            out.set_requires_grad(true);
            tape->record({kind, inputs, out, attrs});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// reverse pass
// ---------------------------------------------------------------------------

namespace {

void backward_node(TapeNode& node) {
    // gf: flat row-major view; g: matrix view of the same buffer
    const Array& gf = node.output.grad();
    const ConstMatMap g(gf.data(), node.output.rows(), node.output.cols());
    auto& in = node.inputs;
    auto wants = [&](size_t i) { return in[i].requires_grad(); };

    switch (node.kind) {
        case Primitive::matmul: {
            if (wants(0)) in[0].grad_mat() += g * in[1].mat().transpose();
            if (wants(1)) in[1].grad_mat() += in[0].mat().transpose() * g;
            break;
        }
        case Primitive::add:
        case Primitive::subtract: {
            BinaryPlan p = classify_binary(primitive_name(node.kind), in[0], in[1]);
            if (wants(0)) accumulate(in[0], g, p.a);
            if (wants(1))
                accumulate(in[1], node.kind == Primitive::add ? RowMatrix(g) : RowMatrix(-g),
                           p.b);
            break;
        }
        case Primitive::multiply: {
            BinaryPlan p = classify_binary("multiply", in[0], in[1]);
            if (wants(0))
                accumulate(in[0], g.cwiseProduct(expand(in[1], p.rows, p.cols, p.b)), p.a);
            if (wants(1))
                accumulate(in[1], g.cwiseProduct(expand(in[0], p.rows, p.cols, p.a)), p.b);
            break;
        }
        case Primitive::divide: {
            BinaryPlan p = classify_binary("divide", in[0], in[1]);
            RowMatrix be = expand(in[1], p.rows, p.cols, p.b);
            if (wants(0)) accumulate(in[0], g.cwiseQuotient(be), p.a);
            if (wants(1)) {
                RowMatrix ae = expand(in[0], p.rows, p.cols, p.a);
                accumulate(in[1],
                           RowMatrix(-g.cwiseProduct(ae).cwiseQuotient(be.cwiseProduct(be))),
                           p.b);
            }
            break;
        }
        case Primitive::exp: {
            if (wants(0)) in[0].grad() += gf * node.output.values();
            break;
        }
        case Primitive::log: {
            if (wants(0)) in[0].grad() += gf / in[0].values().max(k_log_floor);
            break;
        }
        case Primitive::sigmoid: {
            if (wants(0)) {
                const Array& s = node.output.values();
                in[0].grad() += gf * s * (1.0 - s);
            }
            break;
        }
        case Primitive::softmax_rows: {
            if (!wants(0)) break;
            auto om = node.output.mat();
            auto gm = in[0].grad_mat();
            for (Index i = 0; i < om.rows(); ++i) {
                RowArray s = om.row(i).array();
                RowArray gr = g.row(i).array();
                double dot = (s * gr).sum();
                gm.row(i) += (s * (gr - dot)).matrix();
            }
            break;
        }
        case Primitive::log_softmax_rows: {
            if (!wants(0)) break;
            auto om = node.output.mat();
            auto gm = in[0].grad_mat();
            for (Index i = 0; i < om.rows(); ++i) {
                RowArray s = om.row(i).array().exp();
                RowArray gr = g.row(i).array();
                gm.row(i) += (gr - s * gr.sum()).matrix();
            }
            break;
        }
        case Primitive::layer_norm: {
            if (!wants(0)) break;
            auto xm = in[0].mat();
            auto gm = in[0].grad_mat();
            for (Index i = 0; i < xm.rows(); ++i) {
                RowArray row = xm.row(i).array();
                double mu = row.mean();
                double var = (row - mu).square().mean();
                double inv = 1.0 / std::sqrt(var + node.attrs.eps);
                RowArray y = (row - mu) * inv;
                RowArray gr = g.row(i).array();
                gm.row(i) += (inv * (gr - gr.mean() - y * (gr * y).mean())).matrix();
            }
            break;
        }
        case Primitive::embedding_lookup: {
            if (!wants(0)) break;
            auto gm = in[0].grad_mat();
            for (size_t i = 0; i < node.attrs.ids.size(); ++i)
                gm.row(node.attrs.ids[i]) += g.row(static_cast<Index>(i));
            break;
        }
        case Primitive::concat: {
            Index at = 0;
            for (auto& part : in) {
                if (node.attrs.axis == 0) {
                    if (part.requires_grad()) part.grad_mat() += g.middleRows(at, part.rows());
                    at += part.rows();
                } else {
                    if (part.requires_grad()) part.grad_mat() += g.middleCols(at, part.cols());
                    at += part.cols();
                }
            }
            break;
        }
        case Primitive::slice: {
            if (!wants(0)) break;
            SlicePlan s = resolve_slice(in[0], node.attrs);
            in[0].grad_mat().block(s.rb, s.cb, s.re - s.rb, s.ce - s.cb) += g;
            break;
        }
        case Primitive::transpose: {
            if (wants(0)) in[0].grad_mat() += g.transpose();
            break;
        }
        case Primitive::sum: {
            if (wants(0)) in[0].grad() += gf[0];
            break;
        }
        case Primitive::mean: {
            if (wants(0)) in[0].grad() += gf[0] / static_cast<double>(in[0].size());
            break;
        }
        case Primitive::abs: {
            if (wants(0)) in[0].grad() += gf * in[0].values().sign();
            break;
        }
        case Primitive::power: {
            if (!wants(0)) break;
            double p = node.attrs.exponent;
            in[0].grad() += gf * p * in[0].values().pow(p - 1.0);
            break;
        }
        case Primitive::where_mask: {
            Array ind = (in[0].values() != 0.0).cast<double>();
            if (in[1].requires_grad()) in[1].grad() += gf * ind;
            if (in[2].requires_grad()) in[2].grad() += gf * (1.0 - ind);
            // the selector mask never receives gradient
            break;
        }
    }
}

}  // namespace

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || !loss.is_scalar())
        throw std::invalid_argument("backward: loss must be a defined scalar");

    for (auto& node : nodes_) {
        for (auto& t : node.inputs) t.drop_grad();
        node.output.drop_grad();
    }
    Tensor seed = loss;
    seed.drop_grad();
    seed.grad()[0] = 1.0;

    last_backward_visits_ = 0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (!it->output.has_grad()) continue;  // not reachable from the loss
        ++last_backward_visits_;
        backward_node(*it);
    }
}

std::map<std::string, Tensor> Tape::backward(const Tensor& loss,
                                             const std::map<std::string, Tensor>& params) {
    for (const auto& [name, t] : params) {
        Tensor p = t;
        p.drop_grad();
    }
    backward(loss);
    std::map<std::string, Tensor> grads;
    for (const auto& [name, t] : params) {
        Tensor g = Tensor::zeros(t.shape());
        if (t.has_grad()) g.values() = t.grad();
        grads.emplace(name, std::move(g));
    }
    return grads;
}

// ---------------------------------------------------------------------------
// free-function surface
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    return apply_primitive(Primitive::matmul, {a, b});
}
Tensor add(const Tensor& a, const Tensor& b) { return apply_primitive(Primitive::add, {a, b}); }
Tensor multiply(const Tensor& a, const Tensor& b) {
    return apply_primitive(Primitive::multiply, {a, b});
}
Tensor subtract(const Tensor& a, const Tensor& b) {
    return apply_primitive(Primitive::subtract, {a, b});
}
Tensor divide(const Tensor& a, const Tensor& b) {
    return apply_primitive(Primitive::divide, {a, b});
}
Tensor exp(const Tensor& x) { return apply_primitive(Primitive::exp, {x}); }
Tensor log(const Tensor& x) { return apply_primitive(Primitive::log, {x}); }
Tensor sigmoid(const Tensor& x) { return apply_primitive(Primitive::sigmoid, {x}); }
Tensor softmax_rows(const Tensor& x) { return apply_primitive(Primitive::softmax_rows, {x}); }
Tensor log_softmax_rows(const Tensor& x) {
    return apply_primitive(Primitive::log_softmax_rows, {x});
}

Tensor layer_norm(const Tensor& x, double eps) {
    OpAttrs attrs;
    attrs.eps = eps;
    return apply_primitive(Primitive::layer_norm, {x}, attrs);
}

Tensor embedding_lookup(const Tensor& table, const std::vector<Index>& ids) {
    OpAttrs attrs;
    attrs.ids = ids;
    return apply_primitive(Primitive::embedding_lookup, {table}, attrs);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    OpAttrs attrs;
    attrs.axis = axis;
    return apply_primitive(Primitive::concat, parts, attrs);
}

Tensor slice(const Tensor& x, Index row_begin, Index row_end, Index col_begin, Index col_end) {
    OpAttrs attrs;
    attrs.row_begin = row_begin;
    attrs.row_end = row_end;
    attrs.col_begin = col_begin;
    attrs.col_end = col_end;
    return apply_primitive(Primitive::slice, {x}, attrs);
}

Tensor transpose(const Tensor& x) { return apply_primitive(Primitive::transpose, {x}); }
Tensor sum(const Tensor& x) { return apply_primitive(Primitive::sum, {x}); }
Tensor mean(const Tensor& x) { return apply_primitive(Primitive::mean, {x}); }
Tensor abs(const Tensor& x) { return apply_primitive(Primitive::abs, {x}); }

Tensor power(const Tensor& x, double exponent) {
    OpAttrs attrs;
    attrs.exponent = exponent;
    return apply_primitive(Primitive::power, {x}, attrs);
}

Tensor where_mask(const Tensor& mask, const Tensor& a, const Tensor& b) {
    return apply_primitive(Primitive::where_mask, {mask, a, b});
}

// ---------------------------------------------------------------------------
// compositions
// ---------------------------------------------------------------------------

Tensor scale(const Tensor& x, double factor) { return multiply(x, Tensor::scalar(factor)); }
Tensor add_scalar(const Tensor& x, double value) { return add(x, Tensor::scalar(value)); }

Tensor relu(const Tensor& x) { return scale(add(x, abs(x)), 0.5); }

Tensor clamp(const Tensor& x, double lo, double hi) {
    // indicators are plain constants, so clamped coordinates get zero gradient
    Tensor below = Tensor::zeros(x.shape());
    Tensor above = Tensor::zeros(x.shape());
    below.values() = (x.values() < lo).cast<double>();
    above.values() = (x.values() > hi).cast<double>();
    Tensor lo_t = Tensor::full(x.shape(), lo);
    Tensor hi_t = Tensor::full(x.shape(), hi);
    return where_mask(below, lo_t, where_mask(above, hi_t, x));
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add(matmul(x, w), b);
}

}  // namespace ease
