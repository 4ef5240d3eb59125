#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "concircle/errors.hpp"
#include "concircle/jet.hpp"

namespace concircle {

enum class Variance { Up, Down };

/// Dense multi-dimensional array of components with an explicit variance
/// signature (one up/down slot per index). Component type is Jet3 while a
/// quantity still carries derivative information and double once the jet
/// order budget is exhausted.
template <class T>
class Tensor {
public:
    Tensor() = default;

    Tensor(int n, std::vector<Variance> variance, const T& fill)
        : n_(n), variance_(std::move(variance)) {
        std::size_t count = 1;
        for (std::size_t s = 0; s < variance_.size(); ++s) count *= n_;
        comp_.assign(count, fill);
    }

    int n() const { return n_; }
    int rank() const { return static_cast<int>(variance_.size()); }
    const std::vector<Variance>& variance() const { return variance_; }
    std::span<const T> components() const { return comp_; }
    std::span<T> components() { return comp_; }

    T& operator()(std::span<const int> idx) { return comp_[offset(idx)]; }
    const T& operator()(std::span<const int> idx) const { return comp_[offset(idx)]; }

    template <class... I>
    T& at(I... idx) {
        const int buf[] = {idx...};
        return comp_[offset(std::span<const int>(buf, sizeof...(idx)))];
    }
    template <class... I>
    const T& at(I... idx) const {
        const int buf[] = {idx...};
        return comp_[offset(std::span<const int>(buf, sizeof...(idx)))];
    }

private:
    std::size_t offset(std::span<const int> idx) const {
        if (idx.size() != variance_.size())
            throw ArgumentError("tensor index rank mismatch");
        std::size_t o = 0;
        for (std::size_t s = 0; s < idx.size(); ++s) o = o * n_ + idx[s];
        return o;
    }

    int n_ = 0;
    std::vector<Variance> variance_;
    std::vector<T> comp_;
};

using JetTensor = Tensor<Jet3>;
using RealTensor = Tensor<double>;

/// Drops the derivative payload, keeping plain component values.
inline RealTensor values_of(const JetTensor& t) {
    RealTensor r(t.n(), t.variance(), 0.0);
    for (std::size_t i = 0; i < t.components().size(); ++i)
        r.components()[i] = t.components()[i].value();
    return r;
}

inline double max_abs(const RealTensor& t) {
    double m = 0.0;
    for (double c : t.components()) m = std::max(m, std::abs(c));
    return m;
}

inline double max_abs(const JetTensor& t) {
    double m = 0.0;
    for (const auto& c : t.components()) m = std::max(m, std::abs(c.value()));
    return m;
}

inline double max_abs_diff(const RealTensor& a, const RealTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.components().size(); ++i)
        m = std::max(m, std::abs(a.components()[i] - b.components()[i]));
    return m;
}

/// Scale-free residual: max-abs defect divided by max(1, scale of inputs).
inline double normalized(double defect, double scale) {
    return defect / std::max(1.0, scale);
}

} // namespace concircle
