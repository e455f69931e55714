#pragma once

#include <optional>
#include <stdexcept>

namespace rwrc::scaling {

struct BetaResult {
  double value = 0.0;
  bool in_window = false;  // beta > 1 required by the asymptotic regime
};

// beta_t = (t / alpha^{d+2})^{1/(1+eta)}
BetaResult beta(double t, double alpha, double eta, int d);

// gamma_t = t / (alpha^2 beta_t) = beta_t^eta alpha^d = t^{eta/(1+eta)} alpha^{(d-2eta)/(1+eta)},
// evaluated via both equivalent forms (they must agree to 1e-12 relative).
double gamma(double t, double alpha, double eta, int d);

enum class Regime { SpreadOut, Critical, Confined };

struct RegimeInfo {
  Regime regime = Regime::Critical;
  double eta = 0.0;
  int d = 0;
  bool d1_caveat = false;      // d = 1 and eta in (1/2, 1): spread-out statement needs eta >= 1
  bool chi_c_positive = false; // continuum problem positive / has a minimizer
  bool chi_c_has_minimizer = false;
  bool chi_d_zd_positive = false;  // chi^d(Z^d) > 0
};

RegimeInfo classify_regime(double eta, int d);

struct AlphaWindow {
  double lower_ratio = 0.0;  // 1/alpha, measures "1 << alpha"
  double upper_ratio = 0.0;  // regime-specific upper-window ratio
  bool pass_lower = false;
  bool pass_upper = false;
  bool pass = false;
  double threshold = 0.1;
};

// Spread-out window: 1 << alpha^{d+2} << t (log t)^{-(1+eta)/eta};
// confined/critical window: 1 << alpha << t^{eta/(d(eta+1))}.
AlphaWindow admissible_alpha(double t, double alpha, double eta, int d, Regime regime,
                             double threshold = 0.1);

struct ChiInput {
  std::optional<double> chi_c;       // continuum value for the spread-out rate
  std::optional<double> chi_d_box;   // discrete value on a fixed box (bracket lower side)
  std::optional<double> chi_d_zd;    // discrete value on the full lattice (bracket upper side)
};

struct NonexitPrediction {
  double scale = 0.0;       // gamma_t, or t^{eta/(1+eta)} in the confined regime
  double rate_upper = 0.0;  // log-probability ~ scale * rate; upper side of the bracket
  double rate_lower = 0.0;  // lower side (equal to upper when no bracket applies)
  bool bracket = false;
  double predicted_log_upper = 0.0;
  double predicted_log_lower = 0.0;
};

// Leading-order slope predictor for log <P(supp(ell_t) in box)>. Inputs must
// match the regime: chi_c when spread-out, chi_d values otherwise.
NonexitPrediction nonexit_predictor(double t, double alpha, double eta, double D, int d,
                                    const ChiInput& chi);

struct LifshitzPrediction {
  double constant = 0.0;  // -(chi_c/eta)^{eta+1} (1-s)^{1-s} (eta+s)^{eta+s}
  double exponent = 0.0;  // eta + s, for Pr(lambda <= eps^{1-s})
};

// Growing-box tail predictor; requires eta > d/2 and s in (0, |d-2eta|/(d+2)).
// Note d-2eta < 0 in this regime, so the interval is taken with the absolute
// value; out-of-range s raises with the evaluated endpoint.
LifshitzPrediction lifshitz_predictor(double eta, double D, double s, double chi_c, int d);

}  // namespace rwrc::scaling
