#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mecsim/config.hpp"
#include "mecsim/dataset.hpp"
#include "mecsim/layers.hpp"

namespace mecsim {

/// Isotropic Gaussian prior N(mu, sigma^2 I).
struct PriorSpec {
    std::vector<double> mu;
    double sigma = 1.0;

    static PriorSpec isotropic(int d, double mu, double sigma);
};

/// Gaussian posterior with covariance s * R(rho), R_ij = rho^|i-j|.
/// s is the per-dimension VARIANCE shared by all dimensions.
struct LatentPosterior {
    std::vector<double> mu;
    double s = 1.0;
    double rho = 0.0;

    int d() const { return static_cast<int>(mu.size()); }
};

/// Row-major d x d covariance s * R(rho).
std::vector<double> ar1_cov(int d, double s, double rho);
/// det(s * R(rho)) = s^d (1 - rho^2)^(d-1), closed form.
double ar1_det(int d, double s, double rho);
/// Lower-triangular L with L L^T = s * R(rho); row-major, zeros above the
/// diagonal. Closed form from the autoregressive recursion.
std::vector<double> ar1_cholesky(int d, double s, double rho);
/// z = mu + L eps; affine, differentiable in (mu, s, rho).
std::vector<double> reparam_sample(const LatentPosterior& post, const std::vector<double>& eps);

double kl_diag(const std::vector<double>& mu, const std::vector<double>& s_vec, const PriorSpec& prior);
double kl_ar1(const LatentPosterior& post, const PriorSpec& prior);

struct KlGrads {
    std::vector<double> dmu;
    double ds = 0.0;
    double drho = 0.0;
};
KlGrads kl_ar1_grads(const LatentPosterior& post, const PriorSpec& prior);

/// Mean negative log-density of the window's W (ch0, ch1) pairs under
/// N(mu, s R(rho)). Training adds this consistency term so the posterior stays
/// interpretable as the law of the delay pair itself; its minimizer is the
/// window's pooled Gaussian fit (mu = channel means, s = pooled variance,
/// rho = pooled correlation), which is what downstream risk evaluation reads
/// off the posterior.
double pair_nll(const std::vector<double>& x, int W, const LatentPosterior& post);
KlGrads pair_nll_grads(const std::vector<double>& x, int W, const LatentPosterior& post);

struct VaeSettings {
    int W = 16;
    int hidden = 32;
    int conv_channels = 8;
    int kernel = 3;
    int latent_samples = 1;
    int eval_latent_samples = 64;
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 3e-3;
    double momentum = 0.9;
    double grad_clip = 100.0;  // max L2 norm of a batch gradient
    double mu_prior = 0.0;
    double sigma_prior = 1.0;

    static VaeSettings from_config(const Config& cfg);
};

/// Joint delay model: encodes a 2 x W window into a correlated 2-D Gaussian
/// posterior over [transmission delay, compute delay] (standardized units)
/// and decodes latent draws back to windows.
class CorrelatedVae {
public:
    static constexpr int kLatentDim = 2;

    CorrelatedVae(const VaeSettings& settings, const Normalization& norm);

    void init_params(std::uint64_t seed);

    struct EpochRow {
        int epoch = 0;  // 1-based
        double mean_loss = 0.0;  // recon + kl, Gaussian normalizer excluded
        double mean_rho = 0.0;
        double mean_s = 0.0;
    };
    /// Minibatch SGD over shuffled windows; deterministic in seed. Aborts
    /// with a diagnostic when the loss stops being finite.
    std::vector<EpochRow> train(const std::vector<InputWindow>& windows, std::uint64_t seed);

    LatentPosterior posterior(const InputWindow& w);
    double mean_rho(const std::vector<InputWindow>& windows);

    struct DelayLaw {
        double mean_ms = 0.0;
        double var_ms2 = 0.0;
    };
    /// Law of total delay tau = tau_t + tau_p implied by the posterior of w,
    /// destandardized to milliseconds. Requires a trained model.
    DelayLaw e2e_delay_distribution(const InputWindow& w);

    /// n latent draws z ~ q(z | w), standardized units.
    std::vector<std::array<double, 2>> sample_latent(const InputWindow& w, int n, std::uint64_t seed);

    /// Forward+backward pass of one window: accumulates parameter gradients
    /// of grad_scale * loss into both networks. eps holds latent_samples
    /// vectors of kLatentDim noise draws.
    struct ElboParts {
        double loss_full = 0.0;   // recon + kl + (D/2) ln 2 pi
        double loss_train = 0.0;  // recon + kl
        double recon = 0.0;
        double kl = 0.0;
        LatentPosterior post;
    };
    ElboParts elbo_backprop(const std::vector<double>& x, const std::vector<std::vector<double>>& eps,
                            double grad_scale);
    /// Same computation without touching gradients.
    ElboParts elbo_eval(const std::vector<double>& x, const std::vector<std::vector<double>>& eps);

    Network& encoder() { return encoder_; }
    Network& decoder() { return decoder_; }
    const VaeSettings& settings() const { return settings_; }
    const Normalization& norm() const { return norm_; }
    const PriorSpec& prior() const { return prior_; }
    bool trained() const { return trained_; }

    std::string save() const;
    static CorrelatedVae load(const std::string& text, std::string_view origin);
    void save_file(const std::string& path) const;
    static CorrelatedVae load_file(const std::string& path);

private:
    LatentPosterior heads_to_posterior(const std::vector<double>& heads) const;

    VaeSettings settings_;
    Normalization norm_;
    PriorSpec prior_;
    Network encoder_, decoder_;
    bool trained_ = false;
};

std::string training_metrics_csv(const std::vector<CorrelatedVae::EpochRow>& rows);

}  // namespace mecsim
