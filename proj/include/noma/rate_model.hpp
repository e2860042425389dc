#pragma once

namespace noma {

/// A NOMA pair with roles assigned: `far` has the weaker channel and decodes
/// its own signal directly; `near` removes the far user's signal by SIC.
struct OrderedPair {
  int far = 0;
  int near = 0;
  double gain_far = 0.0;
  double gain_near = 0.0;

  /// Assigns roles so that gain_far <= gain_near.
  static OrderedPair make(int user_a, double gain_a, int user_b, double gain_b);
};

struct SinrTerms {
  double far_at_near = 0.0;   ///< far user's symbol decoded by the near user
  double near_at_near = 0.0;  ///< near user's own symbol after SIC
  double far_at_far = 0.0;    ///< far user's own symbol, near user as interference
  double near_at_far = 0.0;   ///< near user's symbol eavesdropped by the far user
};

/// All rates in bits/s/Hz.
struct RateReport {
  SinrTerms sinr;
  double rate_near = 0.0;   ///< R_{n,n}
  double rate_far = 0.0;    ///< R_{m,m}
  double eaves_near = 0.0;  ///< R_{n,m}, far user listening to the near user
  double secrecy = 0.0;     ///< R^s_n
  double oma_far = 0.0;     ///< R_m
  double oma_near = 0.0;    ///< R_n
};

struct OmaRates {
  double far = 0.0;
  double near = 0.0;
};

double log2_1p(double x);

SinrTerms sinr_terms(const OrderedPair& pair, double p_far, double p_near, double noise);

/// max(log2(1 + SINR_nn) - log2(1 + SINR_nm), 0).
double secrecy_rate(const OrderedPair& pair, double p_far, double p_near, double noise);

/// Half-resource orthogonal-access rates for the pair budget p_pair.
OmaRates oma_rates(const OrderedPair& pair, double p_pair, double noise);

RateReport rate_report(const OrderedPair& pair, double p_far, double p_near, double noise);

/// Closed-form dR^s_n/dp_n (pre-clamp), nonnegative when gain_far <= gain_near.
double secrecy_derivative_near(const OrderedPair& pair, double p_near, double noise);

}  // namespace noma
