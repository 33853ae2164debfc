#include "collusion/profile.hpp"

#include <string>

#include "collusion/error.hpp"

namespace collusion {

StrategyProfile StrategyProfile::pooling(PriceVector prices) {
  StrategyProfile p;
  p.table_.push_back(std::move(prices));
  return p;
}

StrategyProfile StrategyProfile::tabular(std::vector<PriceVector> by_state) {
  if (by_state.empty()) throw ValidationError("tabular profile needs at least one state");
  StrategyProfile p;
  p.pooling_ = false;
  p.table_ = std::move(by_state);
  return p;
}

const PriceVector& StrategyProfile::prices(std::size_t state_index) const {
  if (pooling_) return table_.front();
  if (state_index >= table_.size())
    throw ValidationError("profile undefined on state " + std::to_string(state_index));
  return table_[state_index];
}

const PriceVector& StrategyProfile::prices(const MarketGame& game, const DemandState& state) const {
  if (pooling_) return table_.front();
  return prices(state_index(game, state));
}

void StrategyProfile::check(const MarketGame& game) const {
  for (const auto& p : table_) {
    if (p.firms() != game.n_firms || p.products() != game.products_per_firm)
      throw ValidationError("profile prices are " + std::to_string(p.firms()) + "x" + std::to_string(p.products()) +
                            ", game is " + std::to_string(game.n_firms) + "x" +
                            std::to_string(game.products_per_firm));
    for (double v : p.values())
      if (v < 0.0) throw ValidationError("profile has a negative price");
  }
  if (!pooling_) {
    const std::size_t m = enumerable_state_count(game);
    if (table_.size() != m)
      throw ValidationError("profile undefined on some state: table covers " + std::to_string(table_.size()) +
                            " of " + std::to_string(m) + " states");
  }
}

}  // namespace collusion
