#include "concircle/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "concircle/errors.hpp"

namespace concircle {
namespace {

// Monomials of degree <= 3 are kept as sorted index triples padded with -1,
// enumerated degree by degree (graded-lexicographic). Per-dimension tables
// carry everything arithmetic needs: the product convolution list and the
// index-raising map used by partial().
struct JetTable {
    int dim = 0;
    int count = 0;
    std::vector<std::array<int, 3>> mono; // sorted, -1 padded
    std::vector<int> degree;
    // mono index for sorted triple (i,j,k), entries offset by +1 so that
    // -1 ("unused slot") maps to 0.
    std::vector<int> lookup; // (dim+1)^3
    struct Prod {
        int a, b, c;
    };
    std::vector<Prod> prods; // all ordered pairs with deg(a)+deg(b) <= 3
    // raise[m*dim + i]: index of monomial m * x_i, or -1 if degree would
    // exceed 3; raise_mult is the exponent of x_i in the raised monomial.
    std::vector<int> raise;
    std::vector<int> raise_mult;

    int find(std::array<int, 3> t) const {
        std::sort(t.begin(), t.end());
        const int d1 = dim + 1;
        return lookup[((t[0] + 1) * d1 + (t[1] + 1)) * d1 + (t[2] + 1)];
    }
};

JetTable build_table(int dim) {
    JetTable t;
    t.dim = dim;
    t.mono.push_back({-1, -1, -1});
    t.degree.push_back(0);
    for (int i = 0; i < dim; ++i) {
        t.mono.push_back({-1, -1, i});
        t.degree.push_back(1);
    }
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            t.mono.push_back({-1, i, j});
            t.degree.push_back(2);
        }
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
            for (int k = j; k < dim; ++k) {
                t.mono.push_back({i, j, k});
                t.degree.push_back(3);
            }
    t.count = static_cast<int>(t.mono.size());

    const int d1 = dim + 1;
    t.lookup.assign(d1 * d1 * d1, -1);
    for (int m = 0; m < t.count; ++m) {
        const auto& a = t.mono[m];
        t.lookup[((a[0] + 1) * d1 + (a[1] + 1)) * d1 + (a[2] + 1)] = m;
    }

    for (int a = 0; a < t.count; ++a)
        for (int b = 0; b < t.count; ++b) {
            if (t.degree[a] + t.degree[b] > 3) continue;
            std::array<int, 6> merged{};
            int n = 0;
            for (int v : t.mono[a])
                if (v >= 0) merged[n++] = v;
            for (int v : t.mono[b])
                if (v >= 0) merged[n++] = v;
            std::array<int, 3> key{-1, -1, -1};
            for (int i = 0; i < n; ++i) key[3 - n + i] = merged[i];
            t.prods.push_back({a, b, t.find(key)});
        }

    t.raise.assign(t.count * dim, -1);
    t.raise_mult.assign(t.count * dim, 0);
    for (int m = 0; m < t.count; ++m) {
        if (t.degree[m] == 3) continue;
        for (int i = 0; i < dim; ++i) {
            std::array<int, 3> key = t.mono[m];
            key[0] = i; // one free slot is guaranteed at the front
            const int up = t.find(key);
            t.raise[m * dim + i] = up;
            int mult = 0;
            for (int v : t.mono[up])
                if (v == i) ++mult;
            t.raise_mult[m * dim + i] = mult;
        }
    }
    return t;
}

const JetTable& table_for(int dim) {
    static const std::array<JetTable, Jet3::kMaxDim + 1> tables = [] {
        std::array<JetTable, Jet3::kMaxDim + 1> a;
        for (int d = 1; d <= Jet3::kMaxDim; ++d) a[d] = build_table(d);
        return a;
    }();
    if (dim < 1 || dim > Jet3::kMaxDim)
        throw ArgumentError("jet dimension must be in [1, " +
                            std::to_string(Jet3::kMaxDim) + "], got " +
                            std::to_string(dim));
    return tables[dim];
}

void require_same_dim(const Jet3& a, const Jet3& b) {
    if (a.dim() != b.dim())
        throw ArgumentError("jet dimension mismatch: " +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
}

double factorial_of_multiplicities(std::span<const int> idx) {
    // idx has length <= 3; the factor is prod over distinct values of
    // (multiplicity!). Only 2! and 3! can occur.
    if (idx.size() < 2) return 1.0;
    if (idx.size() == 2) return idx[0] == idx[1] ? 2.0 : 1.0;
    const bool ab = idx[0] == idx[1], bc = idx[1] == idx[2], ac = idx[0] == idx[2];
    if (ab && bc) return 6.0;
    if (ab || bc || ac) return 2.0;
    return 1.0;
}

} // namespace

int jet_coefficient_count(int dim) { return table_for(dim).count; }

Jet3::Jet3(int dim, int order) : dim_(dim), order_(order) {
    coeff_.assign(table_for(dim).count, 0.0);
}

Jet3 Jet3::variable(int index, double value, int dim) {
    const auto& t = table_for(dim);
    if (index < 0 || index >= dim)
        throw ArgumentError("variable index " + std::to_string(index) +
                            " out of range for dimension " + std::to_string(dim));
    if (!std::isfinite(value))
        throw DomainError("non-finite seed value");
    Jet3 j(dim, 3);
    j.coeff_[0] = value;
    j.coeff_[t.find({-1, -1, index})] = 1.0;
    return j;
}

Jet3 Jet3::constant(double value, int dim) {
    if (!std::isfinite(value))
        throw DomainError("non-finite constant value");
    Jet3 j(dim, 3);
    j.coeff_[0] = value;
    return j;
}

double Jet3::derivative(std::span<const int> indices) const {
    if (indices.size() > 3)
        throw ArgumentError("derivative multi-index longer than 3");
    if (static_cast<int>(indices.size()) > order_)
        throw ContractViolation("jet order exhausted: requested derivative of "
                                "degree " + std::to_string(indices.size()) +
                                " from an order-" + std::to_string(order_) + " jet");
    std::array<int, 3> key{-1, -1, -1};
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= dim_)
            throw ArgumentError("derivative index out of range");
        key[3 - indices.size() + i] = indices[i];
    }
    const int m = table_for(dim_).find(key);
    return coeff_[m] * factorial_of_multiplicities(indices);
}

double Jet3::derivative(std::initializer_list<int> indices) const {
    return derivative(std::span<const int>(indices.begin(), indices.size()));
}

Jet3 Jet3::partial(int index) const {
    const auto& t = table_for(dim_);
    if (index < 0 || index >= dim_)
        throw ArgumentError("partial index out of range");
    if (order_ < 1)
        throw ContractViolation("jet order exhausted: cannot differentiate an "
                                "order-0 jet");
    Jet3 r(dim_, order_ - 1);
    for (int m = 0; m < t.count; ++m) {
        if (t.degree[m] >= order_) continue;
        const int up = t.raise[m * dim_ + index];
        r.coeff_[m] = coeff_[up] * t.raise_mult[m * dim_ + index];
    }
    return r;
}

void Jet3::clamp_to_order() {
    const auto& t = table_for(dim_);
    for (int m = 0; m < t.count; ++m)
        if (t.degree[m] > order_) coeff_[m] = 0.0;
}

void Jet3::check_finite(const char* op) const {
    for (double c : coeff_)
        if (!std::isfinite(c))
            throw DomainError(std::string("non-finite jet coefficient after ") + op);
}

Jet3 Jet3::operator-() const {
    Jet3 r = *this;
    for (double& c : r.coeff_) c = -c;
    return r;
}

Jet3 operator+(const Jet3& a, const Jet3& b) {
    require_same_dim(a, b);
    Jet3 r = a;
    r.order_ = std::min(a.order_, b.order_);
    for (int m = 0; m < static_cast<int>(r.coeff_.size()); ++m)
        r.coeff_[m] += b.coeff_[m];
    r.clamp_to_order();
    r.check_finite("add");
    return r;
}

Jet3 operator-(const Jet3& a, const Jet3& b) {
    require_same_dim(a, b);
    Jet3 r = a;
    r.order_ = std::min(a.order_, b.order_);
    for (int m = 0; m < static_cast<int>(r.coeff_.size()); ++m)
        r.coeff_[m] -= b.coeff_[m];
    r.clamp_to_order();
    r.check_finite("sub");
    return r;
}

Jet3 operator*(const Jet3& a, const Jet3& b) {
    require_same_dim(a, b);
    const auto& t = table_for(a.dim_);
    Jet3 r(a.dim_, std::min(a.order_, b.order_));
    for (const auto& p : t.prods)
        r.coeff_[p.c] += a.coeff_[p.a] * b.coeff_[p.b];
    r.clamp_to_order();
    r.check_finite("mul");
    return r;
}

Jet3 Jet3::reciprocal() const {
    if (value() == 0.0)
        throw DomainError("division by a jet with zero value");
    const double inv = 1.0 / value();
    // 1/(v + w) = inv * (1 - u + u^2 - u^3), u = w*inv, w the deviation part.
    Jet3 u = *this * inv;
    u.coeff_[0] = 0.0;
    const Jet3 u2 = u * u;
    const Jet3 u3 = u2 * u;
    Jet3 r = u3 - u2 + u; // = -(1 - u + u^2 - u^3) + 1
    for (double& c : r.coeff_) c = -c * inv;
    r.coeff_[0] += inv;
    r.check_finite("div");
    return r;
}

Jet3 operator/(const Jet3& a, const Jet3& b) {
    require_same_dim(a, b);
    return a * b.reciprocal();
}

Jet3 operator+(const Jet3& a, double s) {
    Jet3 r = a;
    r.coeff_[0] += s;
    r.check_finite("add");
    return r;
}
Jet3 operator+(double s, const Jet3& a) { return a + s; }
Jet3 operator-(const Jet3& a, double s) { return a + (-s); }
Jet3 operator-(double s, const Jet3& a) { return (-a) + s; }

Jet3 operator*(const Jet3& a, double s) {
    Jet3 r = a;
    for (double& c : r.coeff_) c *= s;
    r.check_finite("mul");
    return r;
}
Jet3 operator*(double s, const Jet3& a) { return a * s; }

Jet3 operator/(const Jet3& a, double s) {
    if (s == 0.0) throw DomainError("division by zero scalar");
    return a * (1.0 / s);
}
Jet3 operator/(double s, const Jet3& a) { return a.reciprocal() * s; }

Jet3 pow_int(const Jet3& a, int exponent) {
    if (exponent < 0) return pow_int(a, -exponent).reciprocal();
    Jet3 r = Jet3::constant(1.0, a.dim());
    Jet3 base = a;
    int e = exponent;
    while (e > 0) {
        if (e & 1) r = r * base;
        base = e > 1 ? base * base : base;
        e >>= 1;
    }
    return r;
}

Jet3 Jet3::compose(double d0, double d1, double d2, double d3) const {
    // f(v + w) truncated at degree 3, w the deviation part (zero value).
    Jet3 w = *this;
    w.coeff_[0] = 0.0;
    const Jet3 w2 = w * w;
    const Jet3 w3 = w2 * w;
    Jet3 r = w * d1 + w2 * (d2 / 2.0) + w3 * (d3 / 6.0);
    r.coeff_[0] += d0;
    r.order_ = order_;
    r.clamp_to_order();
    r.check_finite("elementary function");
    return r;
}

Jet3 sin(const Jet3& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(s, c, -s, -c);
}

Jet3 cos(const Jet3& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.compose(c, -s, -c, s);
}

Jet3 tan(const Jet3& a) {
    const double c = std::cos(a.value());
    if (c == 0.0)
        throw DomainError("tan: cosine vanishes at " + std::to_string(a.value()));
    const double t = std::tan(a.value());
    const double sec2 = 1.0 + t * t;
    return a.compose(t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t));
}

Jet3 exp(const Jet3& a) {
    const double e = std::exp(a.value());
    return a.compose(e, e, e, e);
}

Jet3 ln(const Jet3& a) {
    const double v = a.value();
    if (v <= 0.0)
        throw DomainError("ln: non-positive argument " + std::to_string(v));
    return a.compose(std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

Jet3 sqrt(const Jet3& a) {
    const double v = a.value();
    if (v <= 0.0)
        throw DomainError("sqrt: non-positive argument " + std::to_string(v));
    const double s = std::sqrt(v);
    return a.compose(s, 0.5 / s, -0.25 / (v * s), 0.375 / (v * v * s));
}

Jet3 sinh(const Jet3& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.compose(s, c, s, c);
}

Jet3 cosh(const Jet3& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.compose(c, s, c, s);
}

Jet3 tanh(const Jet3& a) {
    const double t = std::tanh(a.value());
    const double sech2 = 1.0 - t * t;
    return a.compose(t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0));
}

} // namespace concircle
