#pragma once

#include <span>
#include <utility>
#include <vector>

#include "noma/dense_linalg.hpp"

namespace noma {

/// A perfect matching on users 1..2K. Each pair is stored as (lower id,
/// higher id) in selection order.
struct Pairing {
  int num_pairs = 0;
  std::vector<std::pair<int, int>> pairs;

  /// Symmetric 0/1 indicator matrix with a zero diagonal.
  Matrix indicator() const;
  /// Partner of each user, indexed by user id - 1.
  std::vector<int> partners() const;
  /// Pairs sorted by lower id; two pairings are equal iff these match.
  std::vector<std::pair<int, int>> canonical() const;

  friend bool operator==(const Pairing& a, const Pairing& b) { return a.canonical() == b.canonical(); }
};

bool is_perfect_matching(const Pairing& pairing);

/// Greedy discretization: repeatedly take the largest remaining entry whose
/// two users are both unmatched. Ties go to the smaller vec_index.
Pairing greedy_round(std::span<const double> x, int num_pairs);

/// Pairing whose i-th pair is (order[2i], order[2i+1]).
Pairing pairing_from_sequence(std::span<const int> order, int num_pairs);

}  // namespace noma
