#pragma once

// Seeded low-discrepancy initial conditions on the unit sphere bundle of the
// built-in manifolds, and the canonical space-form orbits used by the period
// law scan.

#include <cstdint>
#include <vector>

#include "zoll/dynamics.hpp"
#include "zoll/manifold_zoo.hpp"

namespace zoll {

std::vector<TangentState> sample_unit_states(const ChartManifold& M,
                                             double eps, int count,
                                             std::uint64_t seed);

/// Canonical initial condition for the closed-form space-form orbits
/// (flat torus, round sphere, hyperbolic disk).
TangentState space_form_state(const ChartManifold& M, double eps);

/// Curvature of the built-in space form, or throws for other manifolds.
double space_form_kappa(const ChartManifold& M);

}  // namespace zoll
