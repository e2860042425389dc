#include "noma/rounding.hpp"

#include <algorithm>
#include <numeric>

#include "noma/errors.hpp"
#include "noma/pairing_lp.hpp"

namespace noma {

Matrix Pairing::indicator() const {
  const auto users = static_cast<std::size_t>(2 * num_pairs);
  Matrix x(users, users);
  for (const auto& [m, n] : pairs) {
    x(static_cast<std::size_t>(m - 1), static_cast<std::size_t>(n - 1)) = 1.0;
    x(static_cast<std::size_t>(n - 1), static_cast<std::size_t>(m - 1)) = 1.0;
  }
  return x;
}

std::vector<int> Pairing::partners() const {
  std::vector<int> out(static_cast<std::size_t>(2 * num_pairs), 0);
  for (const auto& [m, n] : pairs) {
    out[static_cast<std::size_t>(m - 1)] = n;
    out[static_cast<std::size_t>(n - 1)] = m;
  }
  return out;
}

std::vector<std::pair<int, int>> Pairing::canonical() const {
  auto out = pairs;
  std::sort(out.begin(), out.end());
  return out;
}

bool is_perfect_matching(const Pairing& pairing) {
  if (pairing.num_pairs < 1 || pairing.pairs.size() != static_cast<std::size_t>(pairing.num_pairs)) return false;
  const int users = 2 * pairing.num_pairs;
  std::vector<int> hits(static_cast<std::size_t>(users), 0);
  for (const auto& [m, n] : pairing.pairs) {
    if (m < 1 || n > users || m >= n) return false;
    ++hits[static_cast<std::size_t>(m - 1)];
    ++hits[static_cast<std::size_t>(n - 1)];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

Pairing greedy_round(std::span<const double> x, int num_pairs) {
  const std::size_t dim = static_cast<std::size_t>(num_pairs) * (2 * static_cast<std::size_t>(num_pairs) - 1);
  if (num_pairs < 1 || x.size() != dim) throw InvalidArgument("greedy_round: expected K(2K-1) entries");

  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // stable_sort keeps equal entries in vec_index order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  Pairing out;
  out.num_pairs = num_pairs;
  std::vector<bool> used(static_cast<std::size_t>(2 * num_pairs), false);
  for (std::size_t idx : order) {
    const auto [m, n] = pair_at(idx + 1, num_pairs);
    const auto um = static_cast<std::size_t>(m - 1);
    const auto un = static_cast<std::size_t>(n - 1);
    if (used[um] || used[un]) continue;
    used[um] = used[un] = true;
    out.pairs.emplace_back(m, n);
    if (out.pairs.size() == static_cast<std::size_t>(num_pairs)) break;
  }
  return out;
}

Pairing pairing_from_sequence(std::span<const int> order, int num_pairs) {
  if (order.size() != static_cast<std::size_t>(2 * num_pairs)) throw InvalidArgument("pairing_from_sequence: size");
  Pairing p;
  p.num_pairs = num_pairs;
  for (std::size_t i = 0; i + 1 < order.size(); i += 2)
    p.pairs.emplace_back(std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1]));
  if (!is_perfect_matching(p)) throw InvalidArgument("pairing_from_sequence: not a perfect matching");
  return p;
}

}  // namespace noma
