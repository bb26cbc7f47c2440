#pragma once

#include <span>
#include <string>

namespace mecsim {

struct RiskEstimate {
    double var_ms = 0.0;
    double cvar_ms = 0.0;
    double alpha = 0.0;
    enum class Source { Empirical, Gaussian } source = Source::Empirical;
};

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard-normal CDF, |error| < 1e-13 over (0,1).
double normal_quantile(double p);

/// Smallest sample value t with (fraction of samples strictly above t) <= alpha,
/// i.e. the upper-tail quantile of the right-continuous empirical CDF.
double var_empirical(std::span<const double> samples, double alpha);

/// Mean of the samples strictly above VaR_alpha; falls back to VaR when the
/// strict tail is empty (atom at the quantile).
double cvar_empirical(std::span<const double> samples, double alpha);

struct RockafellarResult {
    double cvar = 0.0;
    double tau_th = 0.0;  // first minimizer of the auxiliary function
};

/// Minimizes phi(t) = t + E[(x - t)+] / alpha over candidate thresholds.
/// phi is piecewise linear with breakpoints at the sample values, so scanning
/// those suffices; the first minimizer is returned.
RockafellarResult cvar_rockafellar(std::span<const double> samples, double alpha);

/// Closed-form CVaR of N(mean, variance): mean + sd * pdf(q) / alpha with q
/// the standard-normal (1 - alpha)-quantile.
double cvar_gaussian(double mean, double variance, double alpha);

RiskEstimate estimate_risk_empirical(std::span<const double> samples, double alpha);
RiskEstimate estimate_risk_gaussian(double mean, double variance, double alpha);

}  // namespace mecsim
