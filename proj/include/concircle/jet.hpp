#pragma once

#include <span>
#include <vector>

namespace concircle {

/// Truncated multivariate Taylor expansion: a scalar value together with
/// all partial derivatives through third order in `dim` chart coordinates.
///
/// Storage is dense in graded-lexicographic monomial order, one Taylor
/// coefficient per monomial of total degree <= 3 (the degree-0 entry is the
/// value; a mixed partial equals coefficient times multi-index factorial).
/// All arithmetic propagates coefficients exactly, so curvature residuals
/// downstream carry no finite-difference error.
///
/// `order()` tracks how many derivative levels are still trustworthy:
/// seeds start at 3, taking a partial derivative drops one level, and
/// binary operations take the minimum of their operands. Coefficients
/// above the current order are kept at exact zero.
///
/// Jets are immutable values; every operation returns a fresh jet, so
/// distinct sample points can be evaluated concurrently.
class Jet3 {
public:
    static constexpr int kMaxDim = 8;

    Jet3() = default;

    /// Seed for the i-th chart coordinate: value `value`, unit first-order
    /// coefficient in slot i, everything else zero.
    static Jet3 variable(int index, double value, int dim);

    /// Seed for a constant: all derivative coefficients zero.
    static Jet3 constant(double value, int dim);

    int dim() const { return dim_; }
    int order() const { return order_; }
    double value() const { return coeff_.empty() ? 0.0 : coeff_[0]; }
    std::span<const double> coefficients() const { return coeff_; }

    /// Mixed partial derivative for the given coordinate indices
    /// (e.g. {0,0} is d2/dx0^2). Up to three indices.
    double derivative(std::span<const int> indices) const;
    double derivative(std::initializer_list<int> indices) const;

    /// Jet of the partial derivative along coordinate i; one order lower.
    Jet3 partial(int index) const;

    Jet3 operator-() const;

    friend Jet3 operator+(const Jet3& a, const Jet3& b);
    friend Jet3 operator-(const Jet3& a, const Jet3& b);
    friend Jet3 operator*(const Jet3& a, const Jet3& b);
    friend Jet3 operator/(const Jet3& a, const Jet3& b);

    friend Jet3 operator+(const Jet3& a, double s);
    friend Jet3 operator+(double s, const Jet3& a);
    friend Jet3 operator-(const Jet3& a, double s);
    friend Jet3 operator-(double s, const Jet3& a);
    friend Jet3 operator*(const Jet3& a, double s);
    friend Jet3 operator*(double s, const Jet3& a);
    friend Jet3 operator/(const Jet3& a, double s);
    friend Jet3 operator/(double s, const Jet3& a);

    friend Jet3 pow_int(const Jet3& a, int exponent);

    friend Jet3 sin(const Jet3& a);
    friend Jet3 cos(const Jet3& a);
    friend Jet3 tan(const Jet3& a);
    friend Jet3 exp(const Jet3& a);
    friend Jet3 ln(const Jet3& a);
    friend Jet3 sqrt(const Jet3& a);
    friend Jet3 sinh(const Jet3& a);
    friend Jet3 cosh(const Jet3& a);
    friend Jet3 tanh(const Jet3& a);

private:
    Jet3(int dim, int order);

    Jet3 reciprocal() const;
    Jet3 compose(double d0, double d1, double d2, double d3) const;
    void clamp_to_order();
    void check_finite(const char* op) const;

    int dim_ = 0;
    int order_ = 0;
    std::vector<double> coeff_;
};

/// Number of monomials of degree <= 3 in `dim` variables, C(dim+3, 3).
int jet_coefficient_count(int dim);

} // namespace concircle
