#include "noma/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "noma/errors.hpp"
#include "noma/power_alloc.hpp"
#include "noma/rate_model.hpp"

namespace noma {

Pairing random_pairing(int num_pairs, Rng& rng) {
  if (num_pairs < 1) throw InvalidArgument("random_pairing: need at least one pair");
  std::vector<int> users(static_cast<std::size_t>(2 * num_pairs));
  std::iota(users.begin(), users.end(), 1);
  for (std::size_t i = users.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(users[i], users[j]);
  }
  return pairing_from_sequence(users, num_pairs);
}

Pairing random_pairing(const Scenario& scenario, Rng& rng) { return random_pairing(scenario.num_pairs(), rng); }

double gale_shapley_score(const Scenario& scenario, int user_a, int user_b) {
  const OrderedPair pair = OrderedPair::make(user_a, scenario.gain(user_a), user_b, scenario.gain(user_b));
  const double per_pair = scenario.budget / scenario.num_pairs();
  return allocate_pair(pair, per_pair, scenario.noise_power).secrecy;
}

namespace {

struct Sides {
  std::vector<int> proposers;  // strongest K
  std::vector<int> receivers;  // weakest K
};

Sides split_sides(const Scenario& scenario) {
  std::vector<int> users(static_cast<std::size_t>(scenario.num_users()));
  std::iota(users.begin(), users.end(), 1);
  std::stable_sort(users.begin(), users.end(),
                   [&](int a, int b) { return scenario.gain(a) > scenario.gain(b); });
  const auto k = static_cast<std::ptrdiff_t>(scenario.num_pairs());
  return Sides{{users.begin(), users.begin() + k}, {users.begin() + k, users.end()}};
}

// Orders candidates by descending score, then ascending user id.
std::vector<int> ranked(const Scenario& scenario, int who, std::vector<int> candidates) {
  std::vector<double> score(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) score[i] = gale_shapley_score(scenario, who, candidates[i]);
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return candidates[a] < candidates[b];
  });
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(candidates[i]);
  return out;
}

}  // namespace

Pairing gale_shapley_pairing(const Scenario& scenario) {
  const int users = scenario.num_users();
  const Sides sides = split_sides(scenario);
  const std::size_t k = sides.proposers.size();

  std::vector<std::vector<int>> prefs(static_cast<std::size_t>(users + 1));
  for (int p : sides.proposers) prefs[static_cast<std::size_t>(p)] = ranked(scenario, p, sides.receivers);
  // rank_of[r][p]: position of proposer p in receiver r's list.
  std::vector<std::vector<std::size_t>> rank_of(static_cast<std::size_t>(users + 1),
                                                std::vector<std::size_t>(static_cast<std::size_t>(users + 1)));
  for (int r : sides.receivers) {
    const auto list = ranked(scenario, r, sides.proposers);
    for (std::size_t i = 0; i < list.size(); ++i)
      rank_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(list[i])] = i;
  }

  std::vector<int> engaged_to(static_cast<std::size_t>(users + 1), 0);
  std::vector<std::size_t> next(static_cast<std::size_t>(users + 1), 0);
  std::vector<int> free(sides.proposers.rbegin(), sides.proposers.rend());
  while (!free.empty()) {
    const int p = free.back();
    const int r = prefs[static_cast<std::size_t>(p)][next[static_cast<std::size_t>(p)]++];
    const int current = engaged_to[static_cast<std::size_t>(r)];
    if (current == 0) {
      engaged_to[static_cast<std::size_t>(r)] = p;
      free.pop_back();
    } else if (rank_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(p)] <
               rank_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(current)]) {
      engaged_to[static_cast<std::size_t>(r)] = p;
      free.back() = current;
    }
  }

  Pairing out;
  out.num_pairs = static_cast<int>(k);
  for (int r : sides.receivers) {
    const int p = engaged_to[static_cast<std::size_t>(r)];
    out.pairs.emplace_back(std::min(p, r), std::max(p, r));
  }
  return out;
}

bool is_stable(const Scenario& scenario, const Pairing& pairing) {
  const Sides sides = split_sides(scenario);
  const auto partner = pairing.partners();
  auto score = [&](int a, int b) { return gale_shapley_score(scenario, a, b); };
  for (int p : sides.proposers) {
    const int mp = partner[static_cast<std::size_t>(p - 1)];
    for (int r : sides.receivers) {
      if (r == mp) continue;
      const int mr = partner[static_cast<std::size_t>(r - 1)];
      if (score(p, r) > score(p, mp) && score(p, r) > score(mr, r)) return false;
    }
  }
  return true;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;

class TableauSolver {
 public:
  TableauSolver(const LPData& lp, int max_pivots) : max_pivots_(max_pivots) {
    auto& t = tab_;
    t.num_structural = lp.dim;
    t.num_slack = lp.A.rows();
    t.num_artificial = lp.D.rows();
    const std::size_t m = t.num_slack + t.num_artificial;
    cols_ = t.num_structural + t.num_slack + t.num_artificial;
    t.rows = Matrix(m, cols_ + 1);
    t.basis.resize(m);
    // Each inequality row is scaled to unit max-norm; the power row otherwise
    // carries entries orders of magnitude below the box rows.
    for (std::size_t i = 0; i < t.num_slack; ++i) {
      const auto a = lp.A.row(i);
      double scale = 0.0;
      for (double v : a) scale = std::max(scale, std::abs(v));
      scale = scale > 0.0 ? 1.0 / scale : 1.0;
      for (std::size_t j = 0; j < lp.dim; ++j) t.rows(i, j) = a[j] * scale;
      t.rows(i, lp.dim + i) = 1.0;
      t.rows(i, cols_) = lp.u[i] * scale;
      t.basis[i] = lp.dim + i;
    }
    for (std::size_t k = 0; k < t.num_artificial; ++k) {
      const std::size_t i = t.num_slack + k;
      for (std::size_t j = 0; j < lp.dim; ++j) t.rows(i, j) = lp.D(k, j);
      t.rows(i, lp.dim + t.num_slack + k) = 1.0;
      t.rows(i, cols_) = 1.0;
      t.basis[i] = lp.dim + t.num_slack + k;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (t.rows(i, cols_) < 0.0) throw InvalidArgument("simplex: negative right-hand side");
    }
    allowed_.assign(cols_, true);
  }

  SimplexResult solve(const LPData& lp) {
    auto& t = tab_;
    const std::size_t first_art = t.num_structural + t.num_slack;

    // Phase 1: maximize -sum(artificials).
    std::vector<double> cost(cols_, 0.0);
    for (std::size_t j = first_art; j < cols_; ++j) cost[j] = -1.0;
    price_out(cost);
    iterate();
    if (-t.reduced[cols_] > kFeasTol * static_cast<double>(t.num_artificial))
      throw InfeasibleError("simplex: LP is infeasible (phase-one objective " + std::to_string(-t.reduced[cols_]) + ")");
    drive_out_artificials(first_art);
    for (std::size_t j = first_art; j < cols_; ++j) allowed_[j] = false;

    // Phase 2.
    t.phase = 2;
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < t.num_structural; ++j) cost[j] = lp.r_s[j];
    price_out(cost);
    iterate();

    SimplexResult r;
    r.x.assign(t.num_structural, 0.0);
    for (std::size_t i = 0; i < t.basis.size(); ++i)
      if (t.basis[i] < t.num_structural) r.x[t.basis[i]] = std::max(0.0, t.rows(i, cols_));
    r.objective = std::inner_product(lp.r_s.begin(), lp.r_s.end(), r.x.begin(), 0.0);
    check_feasible(lp, r.x);
    r.pivots = pivots_;
    r.tableau = std::move(tab_);
    return r;
  }

 private:
  // Guards against round-off wrecking the tableau.
  static void check_feasible(const LPData& lp, const Vector& x) {
    constexpr double tol = 1e-6;
    const Vector dx = multiply(lp.D, x);
    for (double v : dx)
      if (std::abs(v - 1.0) > tol) throw NumericDomainError("simplex: basic solution violates D x = 1");
    const Vector ax = multiply(lp.A, x);
    for (std::size_t i = 0; i < ax.size(); ++i)
      if (ax[i] > lp.u[i] + tol * std::max(1.0, std::abs(lp.u[i])))
        throw NumericDomainError("simplex: basic solution violates A x <= u");
  }

  // reduced[j] = c_j - c_B^T column_j; reduced[rhs] = c_B^T rhs (objective).
  void price_out(const std::vector<double>& cost) {
    auto& t = tab_;
    t.reduced.assign(cols_ + 1, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) t.reduced[j] = cost[j];
    for (std::size_t i = 0; i < t.basis.size(); ++i) {
      const double cb = cost[t.basis[i]];
      if (cb == 0.0) continue;
      const auto row = t.rows.row(i);
      for (std::size_t j = 0; j < cols_; ++j) t.reduced[j] -= cb * row[j];
      t.reduced[cols_] += cb * row[cols_];
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& t = tab_;
    auto prow = t.rows.row(r);
    const double inv = 1.0 / prow[c];
    for (double& v : prow) v *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < t.basis.size(); ++i) {
      if (i == r) continue;
      auto row = t.rows.row(i);
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    const double f = t.reduced[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) t.reduced[j] -= f * prow[j];
      t.reduced[cols_] += f * prow[cols_];
      t.reduced[c] = 0.0;
    }
    t.basis[r] = c;
    if (++pivots_ > max_pivots_) throw ConvergenceError("simplex: pivot cap exceeded (cycling guard)");
  }

  // Bland's rule: lowest-index improving column, ties in the ratio test go to
  // the lowest-index basic variable.
  void iterate() {
    auto& t = tab_;
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed_[j] && t.reduced[j] > kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return;

      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t.basis.size(); ++i) {
        const double a = t.rows(i, enter);
        if (a > kPivotTol) best = std::min(best, std::max(0.0, t.rows(i, cols_)) / a);
      }
      if (!std::isfinite(best)) throw ConvergenceError("simplex: LP is unbounded");
      std::size_t leave = t.basis.size();
      for (std::size_t i = 0; i < t.basis.size(); ++i) {
        const double a = t.rows(i, enter);
        if (a <= kPivotTol || std::max(0.0, t.rows(i, cols_)) / a > best + kPivotTol) continue;
        if (leave == t.basis.size() || t.basis[i] < t.basis[leave]) leave = i;
      }
      pivot(leave, enter);
    }
  }

  void drive_out_artificials(std::size_t first_art) {
    auto& t = tab_;
    for (std::size_t i = 0; i < t.basis.size();) {
      if (t.basis[i] < first_art) {
        ++i;
        continue;
      }
      std::size_t col = first_art;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::abs(t.rows(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col < first_art) {
        pivot(i, col);
        ++i;
      } else {
        remove_row(i);  // redundant equality
      }
    }
  }

  void remove_row(std::size_t r) {
    auto& t = tab_;
    Matrix shrunk(t.rows.rows() - 1, t.rows.cols());
    for (std::size_t i = 0, k = 0; i < t.rows.rows(); ++i) {
      if (i == r) continue;
      const auto src = t.rows.row(i);
      std::copy(src.begin(), src.end(), shrunk.row(k++).begin());
    }
    t.rows = std::move(shrunk);
    t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(r));
  }

  SimplexTableau tab_;
  std::size_t cols_ = 0;
  std::vector<bool> allowed_;
  int pivots_ = 0;
  int max_pivots_;
};

}  // namespace

SimplexResult simplex_solve(const LPData& lp, int max_pivots) {
  if (lp.dim == 0) throw InvalidArgument("simplex_solve: empty LP");
  TableauSolver solver(lp, max_pivots);
  return solver.solve(lp);
}

}  // namespace noma
