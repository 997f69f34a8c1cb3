#include "zoll/periods.hpp"

#include <cmath>

#include "zoll/seeding.hpp"

namespace zoll {

PeriodReport zoll_defect_report(const ChartManifold& M, double eps,
                                int n_orbits, std::uint64_t seed,
                                const ClosureOptions& opt) {
  if (n_orbits < 2)
    throw ConfigError("zoll_defect_report: need at least two orbits");
  auto states = sample_unit_states(M, eps, n_orbits, seed);
  std::vector<PeriodRow> rows;
  rows.reserve(n_orbits);
  for (int i = 0; i < n_orbits; ++i)
    rows.push_back({i, states[i], detect_period(M, states[i], opt)});
  double lo = opt.window_lo > 0 ? opt.window_lo : 0.5 * opt.T_guess;
  double hi = opt.window_hi > 0 ? opt.window_hi : 1.5 * opt.T_guess;
  return aggregate_periods(eps, std::move(rows), hi - lo);
}

std::vector<PeriodLawRow> period_law_scan(const ChartManifold& M, double kappa,
                                          const std::vector<double>& eps_list,
                                          double integrator_tol) {
  if (space_form_kappa(M) != kappa)
    throw ConfigError("period_law_scan: manifold/curvature mismatch");
  std::vector<PeriodLawRow> rows;
  for (double eps : eps_list) {
    if (kappa < 0 && eps >= 1.0)
      throw ConfigError("period_law_scan: kappa=-1 requires eps < 1");
    PeriodLawRow r;
    r.eps = eps;
    r.T_predicted = kTwoPi / std::sqrt(1.0 + kappa * eps * eps);
    ClosureOptions opt;
    opt.T_guess = r.T_predicted;
    opt.integrator_tol = integrator_tol;
    ClosureResult c = detect_period(M, space_form_state(M, eps), opt);
    if (!c.closed)
      throw IntegrationError("period_law_scan: space-form orbit did not close");
    r.T_measured = c.period;
    r.closure_defect = c.defect;
    r.rel_err = std::abs(r.T_measured - r.T_predicted) / r.T_predicted;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace zoll
