#include "collusion/equilibria.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "collusion/error.hpp"
#include "collusion/parallel.hpp"

namespace collusion {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Products grouped by the player that prices them.
using Players = std::vector<std::vector<std::size_t>>;

Players firms_as_players(const MarketGame& game) {
  Players players(game.n_firms);
  for (std::size_t i = 0; i < game.n_firms; ++i)
    for (std::size_t k = 0; k < game.products_per_firm; ++k) players[i].push_back(i * game.products_per_firm + k);
  return players;
}

Players single_player(const MarketGame& game) {
  Players players(1);
  players[0].resize(game.products());
  std::iota(players[0].begin(), players[0].end(), std::size_t{0});
  return players;
}

Players coalition_players(const MarketGame& game, const std::vector<std::uint8_t>& coalition) {
  if (coalition.size() != game.n_firms) throw ValidationError("coalition mask needs one entry per firm");
  Players players;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < game.n_firms; ++i) {
    std::vector<std::size_t> own;
    for (std::size_t k = 0; k < game.products_per_firm; ++k) own.push_back(i * game.products_per_firm + k);
    if (coalition[i])
      members.insert(members.end(), own.begin(), own.end());
    else
      players.push_back(std::move(own));
  }
  if (!members.empty()) players.insert(players.begin(), std::move(members));
  return players;
}

// Expected profit of any set of products. Linear demand with linear costs
// reduces to the mean intercept; everything else averages eval_profit over the
// given states (and over fixed noise draws when costs are not linear).
class Objective {
 public:
  Objective(const MarketGame& game, std::span<const WeightedState> states, const SolverOptions& options)
      : game_(game), states_(states.begin(), states.end()) {
    const auto* linear = as_linear(game);
    if (linear && all_costs_linear(game)) {
      fast_ = true;
      const std::size_t nk = game.products();
      m_ = MatrixXd::Zero(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(nk));
      for (std::size_t j = 0; j < nk; ++j)
        for (std::size_t l = 0; l < nk; ++l)
          m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
              j == l ? linear->own_slope : -linear->cross[j * nk + l];
      abar_ = VectorXd::Zero(static_cast<Eigen::Index>(nk));
      for (const auto& ws : states_) {
        const auto a = linear_intercepts(game, ws.state);
        for (std::size_t j = 0; j < nk; ++j) abar_(static_cast<Eigen::Index>(j)) += ws.weight * a[j];
      }
      const auto c = marginal_costs(game);
      c_ = Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    } else if (!all_costs_linear(game) && game.noise_variance > 0.0) {
      Rng rng = make_rng(options.noise_seed);
      for (std::size_t s = 0; s < options.noise_samples; ++s) draws_.push_back(sample_noise(rng, game));
    }
  }

  bool fast() const { return fast_; }
  const MatrixXd& m() const { return m_; }
  const VectorXd& abar() const { return abar_; }
  const VectorXd& c() const { return c_; }

  // Profit of the products in `products` at the NK price vector x.
  double products_profit(const std::vector<std::size_t>& products, std::span<const double> x) const {
    if (fast_) {
      const Eigen::Index nk = m_.rows();
      double total = 0.0;
      for (std::size_t j : products) {
        const auto r = static_cast<Eigen::Index>(j);
        double q = abar_(r);
        for (Eigen::Index l = 0; l < nk; ++l) q -= m_(r, l) * x[static_cast<std::size_t>(l)];
        total += (x[j] - c_(r)) * q;
      }
      return total;
    }
    PriceVector p(game_.n_firms, game_.products_per_firm, std::vector<double>(x.begin(), x.end()));
    std::vector<std::uint8_t> firms(game_.n_firms, 0);
    for (std::size_t j : products) firms[j / game_.products_per_firm] = 1;
    double total = 0.0;
    for (const auto& ws : states_) {
      if (draws_.empty()) {
        const auto q = eval_demand(game_, p, ws.state);
        for (std::size_t i = 0; i < game_.n_firms; ++i)
          if (firms[i]) total += ws.weight * eval_profit(game_, i, p, q);
      } else {
        double acc = 0.0;
        for (const auto& eps : draws_) {
          const auto q = eval_demand(game_, p, ws.state, eps);
          for (std::size_t i = 0; i < game_.n_firms; ++i)
            if (firms[i]) acc += eval_profit(game_, i, p, q);
        }
        total += ws.weight * acc / static_cast<double>(draws_.size());
      }
    }
    return total;
  }

  std::vector<double> firm_profits(const PriceVector& p) const {
    std::vector<double> out(game_.n_firms);
    for (std::size_t i = 0; i < game_.n_firms; ++i) {
      std::vector<std::size_t> own;
      for (std::size_t k = 0; k < game_.products_per_firm; ++k) own.push_back(i * game_.products_per_firm + k);
      out[i] = products_profit(own, p.values());
    }
    return out;
  }

 private:
  const MarketGame& game_;
  std::vector<WeightedState> states_;
  bool fast_ = false;
  MatrixXd m_;
  VectorXd abar_;
  VectorXd c_;
  std::vector<NoiseMatrix> draws_;
};

struct AscentOutcome {
  std::vector<double> x;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Projected gradient ascent on x >= 0 with Armijo backtracking and central
// finite-difference gradients.
template <typename F>
AscentOutcome projected_ascent(F&& f, std::vector<double> x, double tol, std::size_t max_iter) {
  const std::size_t d = x.size();
  for (auto& v : x) v = std::max(0.0, v);
  double fx = f(x);
  double step = 1.0;
  std::vector<double> g(d), trial(d);
  AscentOutcome out;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      const double saved = x[i];
      x[i] = saved + h;
      const double up = f(x);
      x[i] = std::max(0.0, saved - h);
      const double down = f(x);
      const double span = saved + h - x[i];
      x[i] = saved;
      g[i] = (up - down) / span;
    }
    double pg = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (x[i] > 0.0 || g[i] > 0.0) pg = std::max(pg, std::abs(g[i]));
    out.iterations = it + 1;
    if (pg <= tol) {
      out.converged = true;
      out.residual = pg;
      break;
    }
    bool accepted = false;
    while (step > 1e-16) {
      double ascent = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        trial[i] = std::max(0.0, x[i] + step * g[i]);
        ascent += g[i] * (trial[i] - x[i]);
      }
      const double ft = f(trial);
      if (ft >= fx + 1e-4 * ascent && ft >= fx) {
        double moved = 0.0;
        for (std::size_t i = 0; i < d; ++i) moved = std::max(moved, std::abs(trial[i] - x[i]));
        x.swap(trial);
        fx = ft;
        accepted = true;
        out.residual = moved;
        step = std::min(step * 2.0, 1e6);
        break;
      }
      step *= 0.5;
    }
    for (double v : x)
      if (!std::isfinite(v) || v > 1e9)
        throw SolverError("ascent diverged: prices exceed 1e9, objective has no finite maximizer (not concave)");
    if (!accepted) {
      // Line search cannot improve: at a maximum up to finite-difference noise,
      // or the objective is not concave along the gradient.
      out.converged = pg <= 1e-5;
      out.residual = pg;
      if (!out.converged) {
        std::ostringstream msg;
        msg << "ascent oscillation: no improving step with projected gradient " << pg;
        throw SolverError(msg.str());
      }
      break;
    }
    if (out.residual <= tol * std::max(1.0, step)) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

std::size_t grid_axis_points(const GridSpec& grid) {
  if (!(grid.step > 0.0) || !std::isfinite(grid.lower) || !std::isfinite(grid.upper) || grid.upper < grid.lower)
    throw ValidationError("grid needs finite bounds and a positive step");
  return static_cast<std::size_t>(std::floor((grid.upper - grid.lower) / grid.step + 1e-9)) + 1;
}

// Exhaustive maximization of f over the grid in `dims` coordinates. Ties go to
// the lexicographically smallest point, independent of the worker count.
template <typename F>
std::vector<double> grid_argmax(std::size_t dims, const GridSpec& grid, F&& f) {
  const std::size_t axis = grid_axis_points(grid);
  const double total = std::pow(static_cast<double>(axis), static_cast<double>(dims));
  if (total > kMaxGridPoints) {
    std::ostringstream msg;
    msg << "grid of " << total << " points exceeds the limit of " << kMaxGridPoints;
    throw RefusalError(msg.str());
  }
  auto value_at = [&](std::size_t i) { return grid.lower + static_cast<double>(i) * grid.step; };
  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> point;
  };
  std::vector<Best> per_first(axis);
  parallel_for(axis, [&](std::size_t first) {
    std::vector<std::size_t> idx(dims, 0);
    idx[0] = first;
    std::vector<double> x(dims);
    Best best;
    while (true) {
      for (std::size_t d = 0; d < dims; ++d) x[d] = value_at(idx[d]);
      const double v = f(std::span<const double>(x));
      if (v > best.value) {
        best.value = v;
        best.point = x;
      }
      bool done = true;
      for (std::size_t d = dims; d > 1;) {
        --d;
        if (++idx[d] < axis) {
          done = false;
          break;
        }
        idx[d] = 0;
      }
      if (done) break;
    }
    per_first[first] = std::move(best);
  });
  Best best;
  for (auto& b : per_first)
    if (b.value > best.value) best = std::move(b);
  return best.point;
}

std::vector<double> gather(std::span<const double> x, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t j : idx) out.push_back(x[j]);
  return out;
}

// Best response of one player (a set of products) to the remaining prices.
std::vector<double> player_best_response(const Objective& obj, const std::vector<std::size_t>& own,
                                         std::vector<double> x, const SolverOptions& options) {
  auto profit_of = [&](std::span<const double> own_prices) {
    for (std::size_t t = 0; t < own.size(); ++t) x[own[t]] = own_prices[t];
    return obj.products_profit(own, x);
  };

  if (const auto* grid = std::get_if<GridMethod>(&options.method)) {
    // The grid objective mutates a private copy per evaluation.
    const std::vector<double> base = x;
    return grid_argmax(own.size(), grid->grid, [&](std::span<const double> own_prices) {
      std::vector<double> y = base;
      for (std::size_t t = 0; t < own.size(); ++t) y[own[t]] = own_prices[t];
      return obj.products_profit(own, y);
    });
  }

  if (std::holds_alternative<ClosedFormMethod>(options.method) && obj.fast()) {
    const auto n = static_cast<Eigen::Index>(own.size());
    MatrixXd mss(n, n);
    VectorXd rhs(n);
    const Eigen::Index nk = obj.m().rows();
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto jr = static_cast<Eigen::Index>(own[static_cast<std::size_t>(r)]);
      for (Eigen::Index s = 0; s < n; ++s) mss(r, s) = obj.m()(jr, static_cast<Eigen::Index>(own[static_cast<std::size_t>(s)]));
      double v = obj.abar()(jr);
      for (Eigen::Index l = 0; l < nk; ++l)
        if (std::find(own.begin(), own.end(), static_cast<std::size_t>(l)) == own.end())
          v -= obj.m()(jr, l) * x[static_cast<std::size_t>(l)];
      rhs(r) = v;
    }
    VectorXd cs(n);
    for (Eigen::Index r = 0; r < n; ++r) cs(r) = obj.c()(static_cast<Eigen::Index>(own[static_cast<std::size_t>(r)]));
    const MatrixXd hess = mss + mss.transpose();
    Eigen::LLT<MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) throw SolverError("best-response objective is not concave");
    const VectorXd sol = llt.solve(rhs + mss.transpose() * cs);
    std::vector<double> out(sol.data(), sol.data() + n);
    if (std::all_of(out.begin(), out.end(), [](double v) { return v >= 0.0; })) return out;
    if (own.size() == 1) return {std::max(0.0, out[0])};
    // Constrained optimum: continue by projected ascent from the clamp.
    for (auto& v : out) v = std::max(0.0, v);
    return projected_ascent([&](const std::vector<double>& y) { return profit_of(y); }, out, options.tol,
                            options.max_iter)
        .x;
  }

  const auto start = gather(x, own);
  return projected_ascent([&](const std::vector<double>& y) { return profit_of(y); }, start, options.tol,
                          options.max_iter)
      .x;
}

PriceVector start_prices(const MarketGame& game, const SolverOptions& options) {
  if (options.start) return *options.start;
  PriceVector p(game.n_firms, game.products_per_firm);
  for (std::size_t i = 0; i < game.n_firms; ++i) {
    const auto& spec = game.costs.at(i);
    for (std::size_t k = 0; k < game.products_per_firm; ++k) {
      if (const auto* lin = std::get_if<LinearCost>(&spec))
        p(i, k) = lin->marginal[k];
      else
        p(i, k) = std::get<QuadraticCost>(spec).linear[k];
    }
  }
  return p;
}

// Simultaneous best responses over players.
EquilibriumResult iterate_players(const MarketGame& game, const Objective& obj, const Players& players,
                                  const SolverOptions& options) {
  PriceVector p = start_prices(game, options);
  EquilibriumResult out;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    std::vector<double> next = p.values();
    for (const auto& own : players) {
      const auto br = player_best_response(obj, own, p.values(), options);
      for (std::size_t t = 0; t < own.size(); ++t) next[own[t]] = br[t];
    }
    double moved = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) moved = std::max(moved, std::abs(next[j] - p.values()[j]));
    p.values() = std::move(next);
    out.residual = moved;
    if (moved <= options.tol) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;
  }
  out.prices = std::move(p);
  out.per_firm_profits = obj.firm_profits(out.prices);
  return out;
}

// Stacked first-order conditions of linear demand:
// (M + (M o G)^T) p = abar + (M o G)^T c, G(j,l) = 1 when j and l share a player.
struct BlockSystem {
  Eigen::PartialPivLU<MatrixXd> lu;
  VectorXd offset;
};

BlockSystem block_system(const Objective& obj, const Players& players, std::size_t nk) {
  std::vector<std::size_t> owner(nk);
  for (std::size_t p = 0; p < players.size(); ++p)
    for (std::size_t j : players[p]) owner[j] = p;
  const auto n = static_cast<Eigen::Index>(nk);
  MatrixXd mg = MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l)
      if (owner[static_cast<std::size_t>(j)] == owner[static_cast<std::size_t>(l)]) mg(j, l) = obj.m()(j, l);
  for (const auto& own : players) {
    const auto k = static_cast<Eigen::Index>(own.size());
    MatrixXd block(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index s = 0; s < k; ++s)
        block(r, s) = obj.m()(static_cast<Eigen::Index>(own[static_cast<std::size_t>(r)]),
                              static_cast<Eigen::Index>(own[static_cast<std::size_t>(s)]));
    Eigen::LLT<MatrixXd> llt(block + block.transpose());
    if (llt.info() != Eigen::Success) throw SolverError("profit is not concave in a player's own prices");
  }
  const MatrixXd lhs = obj.m() + mg.transpose();
  BlockSystem sys{Eigen::PartialPivLU<MatrixXd>(lhs), mg.transpose() * obj.c()};
  if (std::abs(lhs.determinant()) < 1e-12) throw SolverError("first-order system is singular");
  return sys;
}

EquilibriumResult solve_players(const MarketGame& game, std::span<const WeightedState> states,
                                const Players& players, const SolverOptions& options) {
  Objective obj(game, states, options);
  if (obj.fast() && std::holds_alternative<ClosedFormMethod>(options.method)) {
    const auto sys = block_system(obj, players, game.products());
    const VectorXd sol = sys.lu.solve(obj.abar() + sys.offset);
    if ((sol.array() >= 0.0).all()) {
      EquilibriumResult out;
      out.prices = PriceVector(game.n_firms, game.products_per_firm,
                               std::vector<double>(sol.data(), sol.data() + sol.size()));
      out.per_firm_profits = obj.firm_profits(out.prices);
      out.converged = true;
      out.iterations = 1;
      return out;
    }
  }
  if (players.size() == 1 && !std::holds_alternative<GridMethod>(options.method)) {
    // A single player: optimize directly.
    const auto& own = players.front();
    auto start = start_prices(game, options).values();
    double tol = options.tol;
    std::size_t max_iter = options.max_iter;
    if (const auto* asc = std::get_if<AscentMethod>(&options.method)) {
      tol = asc->tol;
      max_iter = asc->max_iter;
    }
    auto res = projected_ascent([&](const std::vector<double>& y) { return obj.products_profit(own, y); }, start,
                                tol, max_iter);
    EquilibriumResult out;
    out.prices = PriceVector(game.n_firms, game.products_per_firm, std::move(res.x));
    out.per_firm_profits = obj.firm_profits(out.prices);
    out.iterations = res.iterations;
    out.converged = res.converged;
    out.residual = res.residual;
    return out;
  }
  return iterate_players(game, obj, players, options);
}

const std::vector<WeightedState>& cached_distribution(const MarketGame& game, std::vector<WeightedState>& slot) {
  slot = state_distribution(game);
  return slot;
}

}  // namespace

std::vector<WeightedState> single_state(const DemandState& state) { return {WeightedState{state, 1.0}}; }

std::vector<double> solve_cbr(const MarketGame& game, std::size_t firm, const PriceVector& rivals,
                              std::span<const WeightedState> states, const SolverOptions& options) {
  if (firm >= game.n_firms) throw ValidationError("firm index " + std::to_string(firm) + " out of range");
  if (rivals.firms() != game.n_firms || rivals.products() != game.products_per_firm)
    throw ValidationError("rival price matrix has the wrong dimensions");
  Objective obj(game, states, options);
  const auto players = firms_as_players(game);
  return player_best_response(obj, players[firm], rivals.values(), options);
}

std::vector<double> solve_cbr(const MarketGame& game, std::size_t firm, const PriceVector& rivals,
                              const SolverOptions& options) {
  std::vector<WeightedState> states;
  return solve_cbr(game, firm, rivals, cached_distribution(game, states), options);
}

EquilibriumResult competitive_fixed_point(const MarketGame& game, std::span<const WeightedState> states,
                                          const SolverOptions& options) {
  Objective obj(game, states, options);
  return iterate_players(game, obj, firms_as_players(game), options);
}

EquilibriumResult competitive_fixed_point(const MarketGame& game, const SolverOptions& options) {
  std::vector<WeightedState> states;
  return competitive_fixed_point(game, cached_distribution(game, states), options);
}

EquilibriumResult competitive_closed_form(const MarketGame& game, std::span<const WeightedState> states) {
  SolverOptions options;
  Objective obj(game, states, options);
  if (!obj.fast()) throw ValidationError("closed-form equilibrium needs linear demand and linear costs");
  return solve_players(game, states, firms_as_players(game), options);
}

EquilibriumResult collusive_optimum(const MarketGame& game, std::span<const WeightedState> states,
                                    const OptimizationMethod& method) {
  SolverOptions options;
  options.method = method;
  if (const auto* grid = std::get_if<GridMethod>(&method)) {
    Objective obj(game, states, options);
    const auto all = single_player(game).front();
    auto best = grid_argmax(game.products(), grid->grid, [&](std::span<const double> x) {
      return obj.products_profit(all, x);
    });
    EquilibriumResult out;
    out.prices = PriceVector(game.n_firms, game.products_per_firm, std::move(best));
    out.per_firm_profits = obj.firm_profits(out.prices);
    out.converged = true;
    out.iterations = 1;
    out.residual = grid->grid.step;
    return out;
  }
  if (std::holds_alternative<ClosedFormMethod>(method)) {
    Objective obj(game, states, options);
    if (!obj.fast()) throw ValidationError("closed-form collusive optimum needs linear demand and linear costs");
  }
  return solve_players(game, states, single_player(game), options);
}

EquilibriumResult collusive_optimum(const MarketGame& game, const OptimizationMethod& method) {
  std::vector<WeightedState> states;
  return collusive_optimum(game, cached_distribution(game, states), method);
}

EquilibriumResult coalition_equilibrium(const MarketGame& game, std::span<const WeightedState> states,
                                        const std::vector<std::uint8_t>& coalition) {
  return solve_players(game, states, coalition_players(game, coalition), SolverOptions{});
}

namespace {

StrategyProfile per_state_profile(const MarketGame& game, const Players& players, const SolverOptions& options) {
  const std::size_t m = enumerable_state_count(game);
  std::vector<PriceVector> table(m);
  const auto* linear = as_linear(game);
  if (linear && all_costs_linear(game) && std::holds_alternative<ClosedFormMethod>(options.method)) {
    // One factorization serves every state: only the intercepts change.
    const auto first = single_state(state_at(game, 0));
    Objective obj(game, first, options);
    const auto sys = block_system(obj, players, game.products());
    for (std::size_t s = 0; s < m; ++s) {
      const auto state = state_at(game, s);
      const auto a = linear_intercepts(game, state);
      const VectorXd rhs = Eigen::Map<const VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())) + sys.offset;
      const VectorXd sol = sys.lu.solve(rhs);
      if ((sol.array() >= 0.0).all()) {
        table[s] = PriceVector(game.n_firms, game.products_per_firm,
                               std::vector<double>(sol.data(), sol.data() + sol.size()));
      } else {
        table[s] = solve_players(game, single_state(state), players, options).prices;
      }
    }
    return StrategyProfile::tabular(std::move(table));
  }
  for (std::size_t s = 0; s < m; ++s) table[s] = solve_players(game, single_state(state_at(game, s)), players, options).prices;
  return StrategyProfile::tabular(std::move(table));
}

}  // namespace

StrategyProfile competitive_profile(const MarketGame& game, const SolverOptions& options) {
  return per_state_profile(game, firms_as_players(game), options);
}

StrategyProfile collusive_profile(const MarketGame& game) {
  return per_state_profile(game, single_player(game), SolverOptions{});
}

StrategyProfile coalition_profile(const MarketGame& game, const std::vector<std::uint8_t>& coalition) {
  return per_state_profile(game, coalition_players(game, coalition), SolverOptions{});
}

double profile_payoff(const MarketGame& game, std::size_t firm, const StrategyProfile& profile) {
  profile.check(game);
  const std::size_t m = enumerable_state_count(game);
  double total = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const auto state = state_at(game, s);
    const auto& p = profile.prices(s);
    total += state_probability(game, s) * eval_profit(game, firm, p, eval_demand(game, p, state));
  }
  return total;
}

double profile_joint_payoff(const MarketGame& game, const StrategyProfile& profile) {
  double total = 0.0;
  for (std::size_t i = 0; i < game.n_firms; ++i) total += profile_payoff(game, i, profile);
  return total;
}

double deviation_payoff(const MarketGame& game, std::size_t firm, const StrategyProfile& profile,
                        const SolverOptions& options) {
  profile.check(game);
  if (firm >= game.n_firms) throw ValidationError("firm index out of range");
  if (profile.is_pooling()) {
    const auto states = state_distribution(game);
    PriceVector p = profile.prices(0);
    const auto br = solve_cbr(game, firm, p, states, options);
    for (std::size_t k = 0; k < br.size(); ++k) p(firm, k) = br[k];
    return expected_firm_profit(game, firm, p, states);
  }
  const std::size_t m = enumerable_state_count(game);
  double total = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const auto state = state_at(game, s);
    const auto one = single_state(state);
    PriceVector p = profile.prices(s);
    const auto br = solve_cbr(game, firm, p, one, options);
    for (std::size_t k = 0; k < br.size(); ++k) p(firm, k) = br[k];
    total += state_probability(game, s) * eval_profit(game, firm, p, eval_demand(game, p, state));
  }
  return total;
}

double compute_delta_star(double deviation, double collusive, double punishment) {
  if (!(deviation > punishment)) throw ValidationError("punishment not harsher than deviation: pi_D <= pi_P");
  return (deviation - collusive) / (deviation - punishment);
}

}  // namespace collusion
