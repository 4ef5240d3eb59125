#include "concircle/frame.hpp"

#include <cmath>
#include <string>

#include "concircle/errors.hpp"

namespace concircle {
namespace {

std::string point_string(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

} // namespace

const Jet3& PointFrame::field(const std::string& name) const {
    const auto it = fields.find(name);
    if (it == fields.end()) throw ArgumentError("unknown field '" + name + "'");
    return it->second;
}

PointFrame build_frame(const Manifest& m, std::span<const double> point,
                       const std::map<std::string, double>& bound) {
    const int n = m.dimension;
    if (static_cast<int>(point.size()) != n)
        throw ArgumentError("point has " + std::to_string(point.size()) +
                            " coordinates, chart has " + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        const auto [lo, hi] = m.sample_box[i];
        const double pad = 1e-12 * std::max(1.0, std::abs(hi - lo));
        if (point[i] < lo - pad || point[i] > hi + pad)
            throw ArgumentError("coordinate '" + m.coordinates[i] + "' = " +
                                std::to_string(point[i]) + " outside sample box [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }

    PointFrame f;
    f.n = n;
    f.point.assign(point.begin(), point.end());

    std::map<std::string, Jet3> env;
    for (int i = 0; i < n; ++i)
        env[m.coordinates[i]] = Jet3::variable(i, point[i], n);
    for (const auto& p : m.params) {
        const auto it = bound.find(p);
        if (it == bound.end())
            throw ArgumentError("chart parameter '" + p + "' has no bound value");
        env[p] = Jet3::constant(it->second, n);
    }
    for (const auto& [name, expr] : m.fields) {
        f.fields[name] = eval_expr(expr, env);
        env[name] = f.fields[name];
    }

    f.g = JetTensor(n, {Variance::Down, Variance::Down}, Jet3::constant(0.0, n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet3 v = eval_expr(m.metric[i][j], env);
            f.g.at(i, j) = v;
            if (j != i) f.g.at(j, i) = v;
        }

    // invert by Gauss-Jordan elimination in jet arithmetic, pivoting on values
    std::vector<std::vector<Jet3>> a(n), inv(n);
    for (int i = 0; i < n; ++i) {
        a[i].assign(n, Jet3::constant(0.0, n));
        inv[i].assign(n, Jet3::constant(0.0, n));
        for (int j = 0; j < n; ++j) a[i][j] = f.g.at(i, j);
        inv[i][i] = Jet3::constant(1.0, n);
    }
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col].value()) > std::abs(a[pivot][col].value()))
                pivot = r;
        if (pivot != col) {
            std::swap(a[pivot], a[col]);
            std::swap(inv[pivot], inv[col]);
            det = -det;
        }
        const Jet3 p = a[col][col];
        if (std::abs(p.value()) <= 1e-300)
            throw DomainError("degenerate metric (zero pivot) at " +
                                  point_string(point),
                              f.point);
        det *= p.value();
        for (int j = 0; j < n; ++j) {
            a[col][j] = a[col][j] / p;
            inv[col][j] = inv[col][j] / p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const Jet3 factor = a[r][col];
            if (factor.value() == 0.0) {
                bool exact_zero = true;
                for (double c : factor.coefficients())
                    if (c != 0.0) exact_zero = false;
                if (exact_zero) continue;
            }
            for (int j = 0; j < n; ++j) {
                a[r][j] = a[r][j] - factor * a[col][j];
                inv[r][j] = inv[r][j] - factor * inv[col][j];
            }
        }
    }
    f.det_g = det;
    if (std::abs(det) <= 1e-12)
        throw DomainError("degenerate metric, |det g| = " + std::to_string(std::abs(det)) +
                              " at " + point_string(point),
                          f.point);

    f.g_inv = JetTensor(n, {Variance::Up, Variance::Up}, Jet3::constant(0.0, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.g_inv.at(i, j) = inv[i][j];

    // Gamma^i_{jk} = 1/2 g^{il} (d_j g_{kl} + d_k g_{jl} - d_l g_{jk}), order 2
    std::vector<JetTensor> dg(n);
    for (int d = 0; d < n; ++d) {
        dg[d] = JetTensor(n, {Variance::Down, Variance::Down}, Jet3::constant(0.0, n));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet3 v = f.g.at(i, j).partial(d);
                dg[d].at(i, j) = v;
                if (j != i) dg[d].at(j, i) = v;
            }
    }
    f.gamma = JetTensor(n, {Variance::Up, Variance::Down, Variance::Down},
                        Jet3::constant(0.0, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                Jet3 sum = Jet3::constant(0.0, n);
                for (int l = 0; l < n; ++l) {
                    const Jet3 term =
                        dg[j].at(k, l) + dg[k].at(j, l) - dg[l].at(j, k);
                    sum = sum + f.g_inv.at(i, l) * term;
                }
                sum = sum * 0.5;
                f.gamma.at(i, j, k) = sum;
                if (k != j) f.gamma.at(i, k, j) = sum;
            }
    return f;
}

} // namespace concircle
