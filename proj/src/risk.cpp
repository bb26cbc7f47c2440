#include "mecsim/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mecsim/error.hpp"

namespace mecsim {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_samples(std::span<const double> samples, double alpha, const char* who) {
    if (samples.empty()) fail(Errc::InvalidArgument, std::string(who) + ": empty sample list");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::InvalidArgument, std::string(who) + ": alpha must be in (0,1)");
    for (double v : samples)
        if (!std::isfinite(v)) fail(Errc::InvalidArgument, std::string(who) + ": non-finite sample");
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(Errc::InvalidArgument, "normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation, then one Halley step against erfc-based
    // cdf brings the result to near machine precision.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double var_empirical(std::span<const double> samples, double alpha) {
    check_samples(samples, alpha, "var_empirical");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    // Tiny slack keeps integer alpha*n boundaries (e.g. 0.1 * 100) from
    // falling on the wrong side after rounding of the product.
    const double limit = alpha * n + 1e-9;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // sorted[i] is the smallest candidate with i+1 samples <= it; the
        // count strictly above is n - (last duplicate index + 1).
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double exceed = n - static_cast<double>(j + 1);
        if (exceed <= limit) return sorted[i];
        i = j;
    }
    return sorted.back();
}

double cvar_empirical(std::span<const double> samples, double alpha) {
    const double var = var_empirical(samples, alpha);
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : samples) {
        if (v > var) {
            sum += v;
            ++count;
        }
    }
    if (count == 0) return var;
    return sum / static_cast<double>(count);
}

RockafellarResult cvar_rockafellar(std::span<const double> samples, double alpha) {
    check_samples(samples, alpha, "cvar_rockafellar");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const double n = static_cast<double>(samples.size());
    RockafellarResult best{0.0, 0.0};
    bool first = true;
    for (double t : sorted) {
        double excess = 0.0;
        for (double v : samples) excess += std::max(v - t, 0.0);
        const double phi = t + excess / (alpha * n);
        if (first || phi < best.cvar) {
            best.cvar = phi;
            best.tau_th = t;
            first = false;
        }
    }
    return best;
}

double cvar_gaussian(double mean, double variance, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::InvalidArgument, "cvar_gaussian: alpha must be in (0,1)");
    if (!std::isfinite(mean) || !std::isfinite(variance))
        fail(Errc::InvalidArgument, "cvar_gaussian: non-finite input");
    if (variance < 0.0) fail(Errc::InvalidArgument, "cvar_gaussian: negative variance");
    if (variance == 0.0) return mean;
    const double q = normal_quantile(1.0 - alpha);
    return mean + std::sqrt(variance) * normal_pdf(q) / alpha;
}

RiskEstimate estimate_risk_empirical(std::span<const double> samples, double alpha) {
    RiskEstimate r;
    r.alpha = alpha;
    r.var_ms = var_empirical(samples, alpha);
    r.cvar_ms = cvar_empirical(samples, alpha);
    r.source = RiskEstimate::Source::Empirical;
    return r;
}

RiskEstimate estimate_risk_gaussian(double mean, double variance, double alpha) {
    RiskEstimate r;
    r.alpha = alpha;
    const double q = normal_quantile(1.0 - alpha);
    r.var_ms = mean + std::sqrt(std::max(variance, 0.0)) * q;
    r.cvar_ms = cvar_gaussian(mean, variance, alpha);
    r.source = RiskEstimate::Source::Gaussian;
    return r;
}

}  // namespace mecsim
