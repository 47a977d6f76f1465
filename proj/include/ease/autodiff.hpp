#pragma once

#include "ease/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace ease {

// ---------------------------------------------------------------------------
// Primitive set. Every model computation is expressed through these kinds so
// that one switch in backward() covers the whole gradient surface.
// ---------------------------------------------------------------------------
enum class Primitive {
    matmul,
    add,
    multiply,
    subtract,
    divide,
    exp,
    log,
    sigmoid,
    softmax_rows,
    log_softmax_rows,
    layer_norm,
    embedding_lookup,
    concat,
    slice,
    transpose,
    sum,
    mean,
    abs,
    power,
    where_mask,
};

const char* primitive_name(Primitive kind);

/// Static attributes of a primitive application. Which fields are read
/// depends on the kind; ids also serves as the gather index list for
/// embedding_lookup.
struct OpAttrs {
    std::vector<Index> ids;  // embedding_lookup row indices
    int axis = 0;            // concat axis (0 or 1)
    Index row_begin = 0, row_end = -1;  // slice; -1 means full extent
    Index col_begin = 0, col_end = -1;
    double eps = 1e-5;       // layer_norm
    double exponent = 1.0;   // power
};

struct TapeNode {
    Primitive kind;
    std::vector<Tensor> inputs;
    Tensor output;
    OpAttrs attrs;
};

// ---------------------------------------------------------------------------
// Tape: ordered record of primitive applications. Construction installs the
// tape as the active one for the current thread; destruction restores the
// previous. One tape per worker; no cross-thread sharing.
// ---------------------------------------------------------------------------
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    void record(TapeNode node) { nodes_.push_back(std::move(node)); }
    size_t size() const { return nodes_.size(); }

    /// Reverse pass from a scalar loss. Clears stale gradient buffers of
    /// every tensor referenced by the tape, seeds d(loss)=1, then visits
    /// each recorded node exactly once in reverse order.
    void backward(const Tensor& loss);

    /// backward() plus collection: one gradient per named parameter, zeros
    /// for parameters the loss does not reach.
    std::map<std::string, Tensor> backward(const Tensor& loss,
                                           const std::map<std::string, Tensor>& params);

    size_t last_backward_visits() const { return last_backward_visits_; }

private:
    std::vector<TapeNode> nodes_;
    Tape* prev_ = nullptr;
    size_t last_backward_visits_ = 0;
};

/// Suspends tape recording for the current scope (inference paths).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();

private:
    Tape* saved_;
};

// ---------------------------------------------------------------------------
// apply_primitive: validates shapes, runs the forward kernel, and records a
// node on the active tape when any input requires gradients.
// ---------------------------------------------------------------------------
Tensor apply_primitive(Primitive kind, const std::vector<Tensor>& inputs,
                       const OpAttrs& attrs = {});

// Free-function surface over apply_primitive.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, double eps = 1e-5);
Tensor embedding_lookup(const Tensor& table, const std::vector<Index>& ids);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& x, Index row_begin, Index row_end, Index col_begin = 0,
             Index col_end = -1);
Tensor transpose(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor power(const Tensor& x, double exponent);
/// out = mask ? a : b elementwise. The selector mask gets no gradient.
Tensor where_mask(const Tensor& mask, const Tensor& a, const Tensor& b);

// Compositions used throughout the models.
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor relu(const Tensor& x);
/// Clamp with zero gradient outside [lo, hi] (indicator-select composition).
Tensor clamp(const Tensor& x, double lo, double hi);
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

}  // namespace ease
