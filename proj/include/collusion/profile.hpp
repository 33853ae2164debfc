#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collusion/market.hpp"

namespace collusion {

// sigma: Theta -> prices. Pooling profiles ignore the state; tabular profiles
// hold one price matrix per state index.
class StrategyProfile {
 public:
  static StrategyProfile pooling(PriceVector prices);
  static StrategyProfile tabular(std::vector<PriceVector> by_state);

  bool is_pooling() const { return pooling_; }
  std::size_t table_size() const { return table_.size(); }

  const PriceVector& prices(std::size_t state_index) const;
  const PriceVector& prices(const MarketGame& game, const DemandState& state) const;
  std::span<const double> firm_prices(std::size_t firm, std::size_t state_index) const {
    return prices(state_index).row(firm);
  }
  const std::vector<PriceVector>& table() const { return table_; }

  // Throws ValidationError unless the profile matches the game's dimensions
  // and, when tabular, covers every state.
  void check(const MarketGame& game) const;

  friend bool operator==(const StrategyProfile&, const StrategyProfile&) = default;

 private:
  bool pooling_ = true;
  std::vector<PriceVector> table_;
};

}  // namespace collusion
