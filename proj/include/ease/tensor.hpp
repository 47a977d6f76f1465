#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ease {

using Index = Eigen::Index;
using Array = Eigen::ArrayXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

using Shape = std::vector<Index>;

inline Index shape_numel(const Shape& shape) {
    Index n = 1;
    for (Index d : shape) n *= d;
    return n;
}

inline std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

struct TensorImpl {
    Shape shape;
    Array values;
    bool requires_grad = false;
    std::optional<Array> grad;
};

/// Dense row-major tensor of 64-bit floats with shared-handle semantics.
/// Copies are cheap and alias the same storage; use clone() for a deep copy.
/// Rank is 1 or 2 in practice; a size-1 tensor of any rank acts as a scalar.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        Tensor t;
        t.impl_ = std::make_shared<TensorImpl>();
        t.impl_->shape = std::move(shape);
        t.impl_->values = Array::Zero(shape_numel(t.impl_->shape));
        t.impl_->requires_grad = requires_grad;
        return t;
    }

    static Tensor full(Shape shape, double value, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        t.impl_->values.setConstant(value);
        return t;
    }

    static Tensor scalar(double value) {
        return full({1}, value);
    }

    static Tensor from_values(Shape shape, std::vector<double> values, bool requires_grad = false) {
        if (shape_numel(shape) != static_cast<Index>(values.size()))
            throw std::invalid_argument("tensor: shape " + shape_to_string(shape) + " does not match " +
                                        std::to_string(values.size()) + " values");
        Tensor t = zeros(std::move(shape), requires_grad);
        for (Index i = 0; i < t.size(); ++i) t.impl_->values[i] = values[static_cast<size_t>(i)];
        return t;
    }

    /// Rank-1 tensor from a value list.
    static Tensor row(std::initializer_list<double> values) {
        return from_values({static_cast<Index>(values.size())}, std::vector<double>(values));
    }

    static Tensor identity(Index n) {
        Tensor t = zeros({n, n});
        for (Index i = 0; i < n; ++i) t.impl_->values[i * n + i] = 1.0;
        return t;
    }

    bool defined() const { return impl_ != nullptr; }

    const Shape& shape() const { return impl_->shape; }
    Index size() const { return impl_->values.size(); }
    int rank() const { return static_cast<int>(impl_->shape.size()); }
    bool is_scalar() const { return size() == 1; }

    /// Rows/cols with rank-1 tensors read as a single row.
    Index rows() const { return rank() >= 2 ? impl_->shape[0] : 1; }
    Index cols() const { return rank() >= 2 ? impl_->shape[1] : (rank() == 1 ? impl_->shape[0] : 1); }

    Array& values() { return impl_->values; }
    const Array& values() const { return impl_->values; }

    double item() const {
        if (!is_scalar())
            throw std::invalid_argument("tensor: item() on non-scalar shape " + shape_to_string(shape()));
        return impl_->values[0];
    }

    MatMap mat() { return MatMap(impl_->values.data(), rows(), cols()); }
    ConstMatMap mat() const { return ConstMatMap(impl_->values.data(), rows(), cols()); }

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool flag) {
        impl_->requires_grad = flag;
        return *this;
    }

    bool has_grad() const { return impl_->grad.has_value(); }

    /// Gradient buffer, allocated as zeros on first access.
    Array& grad() {
        if (!impl_->grad) impl_->grad = Array::Zero(size());
        return *impl_->grad;
    }
    const Array& grad() const { return *impl_->grad; }

    void drop_grad() { impl_->grad.reset(); }

    Tensor clone() const {
        Tensor t;
        t.impl_ = std::make_shared<TensorImpl>(*impl_);
        return t;
    }

    MatMap grad_mat() { return MatMap(grad().data(), rows(), cols()); }

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
    TensorImpl* impl() const { return impl_.get(); }

private:
    std::shared_ptr<TensorImpl> impl_;
};

inline bool same_shape(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape();
}

}  // namespace ease
