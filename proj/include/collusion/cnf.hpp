#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace collusion {

// DIMACS-style literal: +v is x_v, -v is not x_v, variables are 1-based.
using Literal = int;
using Clause = std::vector<Literal>;

struct Cnf {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;
};

struct WeightedCnf {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;
  std::vector<double> weights;  // one per clause
};

// A truth assignment, index 0 holds x_1.
using Assignment = std::vector<std::uint8_t>;

inline bool literal_true(Literal lit, std::span<const std::uint8_t> assignment) {
  const auto var = static_cast<std::size_t>(lit > 0 ? lit : -lit) - 1;
  return (assignment[var] != 0) == (lit > 0);
}

inline bool clause_satisfied(const Clause& clause, std::span<const std::uint8_t> assignment) {
  for (Literal lit : clause)
    if (literal_true(lit, assignment)) return true;
  return false;
}

// Probability that a uniformly random assignment satisfies the clause.
double clause_satisfaction_probability(const Clause& clause);

// Throws ValidationError if a literal is zero or refers past num_vars.
void check_literals(const Cnf& cnf);
void check_literals(const WeightedCnf& cnf);

// Random k-SAT with distinct variables per clause and uniform signs.
Cnf random_ksat(std::size_t num_vars, std::size_t num_clauses, std::size_t k, std::uint64_t seed);

}  // namespace collusion
