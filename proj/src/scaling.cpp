#include "rwrc/scaling.hpp"

#include <cmath>
#include <string>

namespace rwrc::scaling {

namespace {

void check_positive(double t, double alpha, double eta, int d) {
  if (!(t > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("t and alpha must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
}

}  // namespace

BetaResult beta(double t, double alpha, double eta, int d) {
  check_positive(t, alpha, eta, d);
  const double value = std::pow(t / std::pow(alpha, d + 2), 1.0 / (1.0 + eta));
  return {value, value > 1.0};
}

double gamma(double t, double alpha, double eta, int d) {
  check_positive(t, alpha, eta, d);
  const double b = beta(t, alpha, eta, d).value;
  const double g1 = t / (alpha * alpha * b);
  const double g2 = std::pow(b, eta) * std::pow(alpha, d);
  const double g3 = std::pow(t, eta / (1.0 + eta)) *
                    std::pow(alpha, (static_cast<double>(d) - 2.0 * eta) / (1.0 + eta));
  if (std::abs(g1 - g2) > 1e-12 * std::max(std::abs(g1), 1.0) ||
      std::abs(g1 - g3) > 1e-10 * std::max(std::abs(g1), 1.0))
    throw std::runtime_error("gamma identity failed beyond round-off");
  return g1;
}

RegimeInfo classify_regime(double eta, int d) {
  if (!(eta > 0.0) || d < 1) throw std::invalid_argument("eta > 0 and d >= 1 required");
  RegimeInfo info;
  info.eta = eta;
  info.d = d;
  const double half_d = 0.5 * d;
  if (eta > half_d) {
    info.regime = Regime::SpreadOut;
    info.d1_caveat = (d == 1 && eta < 1.0);
    info.chi_c_positive = true;
    info.chi_c_has_minimizer = !info.d1_caveat;
    info.chi_d_zd_positive = false;  // chi^d(Z^d) = 0, no minimizer
  } else if (eta == half_d) {
    info.regime = Regime::Critical;
    info.chi_c_positive = false;
    info.chi_c_has_minimizer = false;
    info.chi_d_zd_positive = d > 1;
  } else {
    info.regime = Regime::Confined;
    info.chi_c_positive = false;
    info.chi_c_has_minimizer = false;
    info.chi_d_zd_positive = d > 1;
  }
  return info;
}

AlphaWindow admissible_alpha(double t, double alpha, double eta, int d, Regime regime,
                             double threshold) {
  check_positive(t, alpha, eta, d);
  AlphaWindow w;
  w.threshold = threshold;
  w.lower_ratio = 1.0 / alpha;
  if (regime == Regime::SpreadOut) {
    w.upper_ratio = std::pow(alpha, d + 2) * std::pow(std::log(t), (1.0 + eta) / eta) / t;
  } else {
    w.upper_ratio = alpha / std::pow(t, eta / (d * (eta + 1.0)));
  }
  w.pass_lower = w.lower_ratio <= threshold;
  w.pass_upper = w.upper_ratio <= threshold;
  w.pass = w.pass_lower && w.pass_upper;
  return w;
}

NonexitPrediction nonexit_predictor(double t, double alpha, double eta, double D, int d,
                                    const ChiInput& chi) {
  check_positive(t, alpha, eta, d);
  if (!(D > 0.0)) throw std::invalid_argument("D must be positive");
  const double K = (1.0 + 1.0 / eta) * std::pow(D * eta, 1.0 / (1.0 + eta));
  const RegimeInfo info = classify_regime(eta, d);
  NonexitPrediction out;
  if (info.regime == Regime::SpreadOut) {
    if (!chi.chi_c) throw std::invalid_argument("spread-out regime requires a chi^c value");
    out.scale = gamma(t, alpha, eta, d);
    out.rate_upper = out.rate_lower = -K * *chi.chi_c;
    out.bracket = false;
  } else {
    if (!chi.chi_d_box && !chi.chi_d_zd)
      throw std::invalid_argument("confined/critical regime requires a chi^d value");
    out.scale = std::pow(t, eta / (eta + 1.0));
    const double lower = chi.chi_d_box ? -K * *chi.chi_d_box
                                       : -K * *chi.chi_d_zd;
    const double upper = chi.chi_d_zd ? -K * *chi.chi_d_zd : lower;
    out.rate_lower = lower;
    out.rate_upper = upper;
    out.bracket = chi.chi_d_box.has_value() && chi.chi_d_zd.has_value() &&
                  *chi.chi_d_box != *chi.chi_d_zd;
  }
  out.predicted_log_upper = out.scale * out.rate_upper;
  out.predicted_log_lower = out.scale * out.rate_lower;
  return out;
}

LifshitzPrediction lifshitz_predictor(double eta, double D, double s, double chi_c, int d) {
  if (!(eta > 0.5 * d))
    throw std::invalid_argument("lifshitz predictor requires eta > d/2");
  if (!(D > 0.0) || !(chi_c > 0.0)) throw std::invalid_argument("D and chi_c must be positive");
  const double s_max = std::abs(static_cast<double>(d) - 2.0 * eta) / (d + 2.0);
  if (!(s > 0.0 && s < s_max))
    throw std::invalid_argument("s outside (0, |d-2eta|/(d+2)) = (0, " + std::to_string(s_max) +
                                "); d-2eta is negative for eta > d/2, so the "
                                "absolute value bounds the interval");
  LifshitzPrediction out;
  out.constant = -std::pow(chi_c / eta, eta + 1.0) * std::pow(1.0 - s, 1.0 - s) *
                 std::pow(eta + s, eta + s);
  out.exponent = eta + s;
  return out;
}

}  // namespace rwrc::scaling
