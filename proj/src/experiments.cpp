#include "collusion/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "collusion/equilibria.hpp"
#include "collusion/error.hpp"
#include "collusion/families.hpp"
#include "collusion/parallel.hpp"

namespace collusion {

namespace {

// Max-norm residual of the observation against every state's prediction.
std::vector<double> state_residuals(const MarketGame& game, const Observation& obs) {
  const std::size_t m = enumerable_state_count(game);
  std::vector<double> out(m);
  for (std::size_t s = 0; s < m; ++s) {
    const QuantityMatrix d = eval_demand(game, obs.prices, state_at(game, s));
    double worst = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k)
      worst = std::max(worst, std::abs(obs.quantities.values()[k] - d.values()[k]));
    out[s] = worst;
  }
  return out;
}

bool within(double residual, double tolerance) { return residual <= tolerance + 1e-12; }

}  // namespace

std::vector<std::size_t> ambiguity_set(const MarketGame& game, const Observation& observation, double noise_variance,
                                       double z) {
  if (noise_variance < 0.0) throw ValidationError("noise variance must be nonnegative");
  if (!(z > 0.0)) throw ValidationError("tolerance multiplier must be positive");
  const double r = z * std::sqrt(noise_variance);
  const auto residuals = state_residuals(game, observation);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < residuals.size(); ++s)
    if (within(residuals[s], r)) out.push_back(s);
  return out;
}

AmbiguityReport transparency_sweep(const MarketGame& game, const StrategyProfile& profile,
                                   const std::vector<double>& variances, std::size_t episodes, std::size_t horizon,
                                   const CapacityBudget& budget, std::uint64_t seed,
                                   const TransparencyOptions& options) {
  if (variances.empty()) throw ValidationError("variance grid is empty");
  for (std::size_t k = 0; k < variances.size(); ++k) {
    if (variances[k] < 0.0) throw ValidationError("noise variance must be nonnegative");
    if (k > 0 && variances[k] < variances[k - 1]) throw ValidationError("variance grid must be sorted ascending");
  }
  profile.check(game);
  const std::size_t nk = variances.size();
  std::vector<MarketGame> games(nk, game);
  std::vector<double> tol(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    set_noise(games[k], std::sqrt(variances[k]), options.z);
    tol[k] = options.z * std::sqrt(variances[k]);
  }

  AmbiguityReport report;
  if (options.deviation_price) {
    report.deviation_price = *options.deviation_price;
  } else {
    const HullSearch hull = evaluate_hull(games.front(), profile, options.tester_firm, seed, {19, 1, 1});
    if (hull.candidates.empty()) throw ValidationError("no profitable hull deviation for the tester firm");
    report.deviation_price = hull.candidates.front().price;
  }

  // Observations are pooled over all noise levels and every level's
  // ambiguity set is measured on the whole pool.
  const std::size_t per_level = options.observations;
  std::vector<std::vector<double>> pool(nk * per_level);
  parallel_for(pool.size(), [&](std::size_t idx) {
    const std::size_t k = idx / per_level;
    const MarketGame& g = games[k];
    const std::uint64_t os = derive_seed(seed, stream::kMonteCarlo, k, idx % per_level);
    Rng rng = make_rng(derive_seed(os, stream::kState));
    const DemandState state = sample_state(g, rng);
    const PriceVector& p = profile.prices(state_index(g, state));
    pool[idx] = state_residuals(g, {p, eval_demand(g, p, state, sample_noise(derive_seed(os, stream::kNoise), g))});
  });
  for (const auto& residuals : pool) {
    for (std::size_t j = 0; j + 1 < nk; ++j) {
      ++report.inclusion_checks;
      for (double r : residuals)
        if (within(r, tol[j]) && !within(r, tol[j + 1])) {
          ++report.inclusion_failures;
          break;
        }
    }
  }

  report.points.resize(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    const MarketGame& g = games[k];
    AmbiguityPoint& pt = report.points[k];
    pt.noise_variance = variances[k];
    pt.tolerance = tol[k];
    std::size_t total = 0;
    for (const auto& residuals : pool)
      for (double r : residuals) total += within(r, tol[k]);
    pt.mean_ambiguity = pool.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(pool.size());

    const DeviationGenerator dev = selective_deviation(g, profile, options.tester_firm, report.deviation_price);
    const DetectionStats stats =
        detection_statistics(g, profile, budget, options.trials, dev, derive_seed(seed, stream::kDetection, k));
    pt.detection_accuracy = stats.accuracy;
    pt.accuracy_se = stats.trials > 0
                         ? std::sqrt(stats.accuracy * (1.0 - stats.accuracy) / static_cast<double>(stats.trials))
                         : 0.0;

    if (episodes > 0) {
      const Scenario sc{g, profile, competitive_profile(g)};
      SweepOptions sweep = options.sweep;
      sweep.tester_firm = options.tester_firm;
      const CapacityBudget caps[] = {budget};
      const RegimeCurve curve = sweep_capacity(sc, caps, episodes, horizon, seed, sweep);
      const RegimePoint& rp = curve.points.front();
      pt.mean_markup = rp.mean_markup;
      pt.normalized_markup = rp.normalized_markup;
      pt.markup_se = rp.normalized_se * std::abs(curve.monopoly_markup - curve.competitive_markup);
    }
  }
  return report;
}

// --- worked duopoly --------------------------------------------------------------

namespace {

struct Solved {
  PriceVector competitive;
  PriceVector collusive;
};

GridSpec window_around(const PriceVector& p, const DuopolyOptions& opt) {
  const auto [lo, hi] = std::minmax_element(p.values().begin(), p.values().end());
  return {opt.fine_step, std::max(0.0, *lo - opt.window), *hi + opt.window};
}

Solved solve_state(const MarketGame& game, const DemandState& state, int method, const DuopolyOptions& opt) {
  const auto states = single_state(state);
  Solved out;
  if (method == 0) {
    out.competitive = competitive_closed_form(game, states).prices;
    out.collusive = collusive_optimum(game, states, ClosedFormMethod{}).prices;
  } else if (method == 1) {
    SolverOptions so;
    so.method = AscentMethod{};
    out.competitive = competitive_fixed_point(game, states, so).prices;
    out.collusive = collusive_optimum(game, states, AscentMethod{}).prices;
  } else {
    SolverOptions coarse;
    coarse.method = GridMethod{{opt.coarse_step, 0.0, 20.0}};
    const auto c0 = competitive_fixed_point(game, states, coarse);
    SolverOptions fine;
    fine.method = GridMethod{window_around(c0.prices, opt)};
    fine.start = c0.prices;
    out.competitive = competitive_fixed_point(game, states, fine).prices;
    const auto m0 = collusive_optimum(game, states, GridMethod{{opt.coarse_step, 0.0, 20.0}});
    out.collusive = collusive_optimum(game, states, GridMethod{window_around(m0.prices, opt)}).prices;
  }
  return out;
}

}  // namespace

DuopolyTable duopoly_example(const DuopolyOptions& options) {
  const MarketGame game = duopoly_game();
  const std::size_t m = enumerable_state_count(game);
  const char* labels[] = {"H", "L"};

  // values[method][row]
  std::vector<std::vector<double>> values(3);
  for (int method = 0; method < 3; ++method) {
    std::vector<PriceVector> comp(m), coll(m);
    for (std::size_t s = 0; s < m; ++s) {
      const Solved sv = solve_state(game, state_at(game, s), method, options);
      comp[s] = sv.competitive;
      coll[s] = sv.collusive;
    }
    const auto comp_profile = StrategyProfile::tabular(comp);
    const auto coll_profile = StrategyProfile::tabular(coll);
    SolverOptions br;
    if (method == 1) br.method = AscentMethod{};
    if (method == 2) br.method = GridMethod{{options.fine_step, 0.0, 20.0}};
    auto& v = values[method];
    for (std::size_t s = 0; s < m; ++s) v.push_back(comp[s](0, 0));
    v.push_back(profile_payoff(game, 0, comp_profile));
    for (std::size_t s = 0; s < m; ++s) v.push_back(coll[s](0, 0));
    v.push_back(profile_payoff(game, 0, coll_profile));
    const double pi_d = deviation_payoff(game, 0, coll_profile, br);
    v.push_back(pi_d);
    v.push_back(compute_delta_star(pi_d, v[m * 2 + 1], v[m]));
  }

  DuopolyTable table;
  auto add = [&](std::string quantity, std::string state, std::optional<double> printed) {
    const std::size_t i = table.rows.size();
    DuopolyRow row{std::move(quantity), std::move(state), values[0][i], values[1][i], values[2][i], printed, false};
    if (printed) row.discrepancy = std::abs(row.closed_form - *printed) > 0.02;
    table.max_solver_gap = std::max({table.max_solver_gap, std::abs(row.closed_form - row.ascent),
                                     std::abs(row.closed_form - row.grid), std::abs(row.ascent - row.grid)});
    table.discrepancy = table.discrepancy || row.discrepancy;
    table.rows.push_back(std::move(row));
  };
  const double printed_comp[] = {5.0, 2.5};
  const double printed_coll[] = {7.0, 4.0};
  for (std::size_t s = 0; s < m; ++s) add("p_star", labels[s], printed_comp[s]);
  add("pi_star", "E", 12.5);
  for (std::size_t s = 0; s < m; ++s) add("p_monopoly", labels[s], printed_coll[s]);
  add("pi_monopoly", "E", 22.5);
  add("pi_deviation", "E", std::nullopt);
  add("delta_star", "E", std::nullopt);
  return table;
}

std::string format_table(const DuopolyTable& table) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-13s %-5s %12s %12s %12s %10s %s\n", "quantity", "state", "closed_form",
                "ascent", "grid", "printed", "discrepancy");
  out << line;
  for (const auto& r : table.rows) {
    char printed[32] = "-";
    if (r.printed) std::snprintf(printed, sizeof printed, "%.4g", *r.printed);
    std::snprintf(line, sizeof line, "%-13s %-5s %12.6f %12.6f %12.6f %10s %s\n", r.quantity.c_str(),
                  r.state.c_str(), r.closed_form, r.ascent, r.grid, printed,
                  r.printed ? (r.discrepancy ? "yes" : "no") : "-");
    out << line;
  }
  return out.str();
}

}  // namespace collusion
