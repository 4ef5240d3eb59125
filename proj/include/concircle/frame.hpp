#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "concircle/manifest.hpp"
#include "concircle/tensor.hpp"

namespace concircle {

/// All metric data at one point, with enough jet order for every downstream
/// quantity: g and its inverse carry order-3 jets, the Christoffel symbols
/// order 2, so curvature tensors retain order 1 and their covariant
/// derivatives are still exact.
struct PointFrame {
    int n = 0;
    std::vector<double> point;
    JetTensor g;       // (down, down), order 3
    JetTensor g_inv;   // (up, up), order 3
    JetTensor gamma;   // (up, down, down), order 2
    double det_g = 0.0;
    std::map<std::string, Jet3> fields;

    const Jet3& field(const std::string& name) const;
};

/// Evaluates the chart at `point`: every coordinate seeded as an order-3
/// jet variable, the inverse metric by Gaussian elimination carried through
/// jet arithmetic, Christoffel symbols from the metric derivatives.
///
/// `bound` supplies values for the manifest's external params (used for
/// factor charts, where the other factor's coordinates enter as constants).
///
/// Throws ArgumentError for an out-of-box point and DomainError when
/// |det g| <= 1e-12 at the point.
PointFrame build_frame(const Manifest& m, std::span<const double> point,
                       const std::map<std::string, double>& bound = {});

} // namespace concircle
