#include "noma/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "noma/errors.hpp"

namespace noma {

namespace {

void check_inputs(const OrderedPair& pair, double p_far, double p_near, double noise) {
  for (double v : {pair.gain_far, pair.gain_near, p_far, p_near, noise}) {
    if (!std::isfinite(v)) throw InvalidArgument("rate model: non-finite input");
  }
  if (p_far < 0.0 || p_near < 0.0) throw InvalidArgument("rate model: negative power");
  if (!(noise > 0.0)) throw InvalidArgument("rate model: noise power must be > 0");
}

}  // namespace

OrderedPair OrderedPair::make(int user_a, double gain_a, int user_b, double gain_b) {
  if (gain_a <= gain_b) return OrderedPair{user_a, user_b, gain_a, gain_b};
  return OrderedPair{user_b, user_a, gain_b, gain_a};
}

double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

SinrTerms sinr_terms(const OrderedPair& pair, double p_far, double p_near, double noise) {
  check_inputs(pair, p_far, p_near, noise);
  const double hm = pair.gain_far;
  const double hn = pair.gain_near;
  SinrTerms s;
  s.far_at_near = p_far * hn / (p_near * hn + noise);
  s.near_at_near = p_near * hn / noise;
  s.far_at_far = p_far * hm / (p_near * hm + noise);
  s.near_at_far = p_near * hm / noise;
  return s;
}

double secrecy_rate(const OrderedPair& pair, double p_far, double p_near, double noise) {
  const SinrTerms s = sinr_terms(pair, p_far, p_near, noise);
  return std::max(log2_1p(s.near_at_near) - log2_1p(s.near_at_far), 0.0);
}

OmaRates oma_rates(const OrderedPair& pair, double p_pair, double noise) {
  check_inputs(pair, p_pair, 0.0, noise);
  return OmaRates{0.5 * log2_1p(p_pair * pair.gain_far / noise), 0.5 * log2_1p(p_pair * pair.gain_near / noise)};
}

RateReport rate_report(const OrderedPair& pair, double p_far, double p_near, double noise) {
  RateReport r;
  r.sinr = sinr_terms(pair, p_far, p_near, noise);
  r.rate_near = log2_1p(r.sinr.near_at_near);
  r.rate_far = log2_1p(r.sinr.far_at_far);
  r.eaves_near = log2_1p(r.sinr.near_at_far);
  r.secrecy = std::max(r.rate_near - r.eaves_near, 0.0);
  const OmaRates oma = oma_rates(pair, p_far + p_near, noise);
  r.oma_far = oma.far;
  r.oma_near = oma.near;
  return r;
}

double secrecy_derivative_near(const OrderedPair& pair, double p_near, double noise) {
  check_inputs(pair, 0.0, p_near, noise);
  const double hm = pair.gain_far;
  const double hn = pair.gain_near;
  return (hn * noise - hm * noise) / ((p_near * hn + noise) * (p_near * hm + noise)) / std::numbers::ln2;
}

}  // namespace noma
