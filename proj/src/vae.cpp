#include "mecsim/vae.hpp"

#include <algorithm>
#include <cmath>

#include "mecsim/csv.hpp"
#include "mecsim/error.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_ar1_args(int d, double s, double rho) {
    if (d < 1) fail(Errc::InvalidArgument, "dimension must be at least 1, got " + format_int(d));
    if (!(s > 0.0)) fail(Errc::InvalidArgument, "scale s must be positive, got " + format_double(s));
    if (!(std::fabs(rho) < 1.0)) {
        fail(Errc::InvalidArgument, "correlation must satisfy |rho| < 1, got " + format_double(rho));
    }
}

void check_prior(const PriorSpec& prior, int d) {
    if (!(prior.sigma > 0.0)) fail(Errc::InvalidArgument, "prior sigma must be positive");
    if (static_cast<int>(prior.mu.size()) != d) {
        fail(Errc::InvalidArgument, "prior mean dimension " + format_u64(prior.mu.size()) +
                                        " does not match posterior dimension " + format_int(d));
    }
}

}  // namespace

PriorSpec PriorSpec::isotropic(int d, double mu, double sigma) {
    if (d < 1) fail(Errc::InvalidArgument, "prior dimension must be at least 1");
    if (!(sigma > 0.0)) fail(Errc::InvalidArgument, "prior sigma must be positive");
    PriorSpec p;
    p.mu.assign(static_cast<std::size_t>(d), mu);
    p.sigma = sigma;
    return p;
}

std::vector<double> ar1_cov(int d, double s, double rho) {
    check_ar1_args(d, s, rho);
    std::vector<double> c(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            c[static_cast<std::size_t>(i) * d + j] = s * std::pow(rho, std::abs(i - j));
        }
    }
    return c;
}

double ar1_det(int d, double s, double rho) {
    check_ar1_args(d, s, rho);
    return std::pow(s, d) * std::pow(1.0 - rho * rho, d - 1);
}

std::vector<double> ar1_cholesky(int d, double s, double rho) {
    check_ar1_args(d, s, rho);
    // x_0 = e_0, x_i = rho x_{i-1} + sqrt(1-rho^2) e_i reproduces R(rho), so
    // rows are powers of rho scaled by the innovation weight.
    const double root_s = std::sqrt(s);
    const double innov = std::sqrt(1.0 - rho * rho);
    std::vector<double> l(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        l[static_cast<std::size_t>(i) * d] = root_s * std::pow(rho, i);
        for (int j = 1; j <= i; ++j) {
            l[static_cast<std::size_t>(i) * d + j] = root_s * innov * std::pow(rho, i - j);
        }
    }
    return l;
}

std::vector<double> reparam_sample(const LatentPosterior& post, const std::vector<double>& eps) {
    const int d = post.d();
    check_ar1_args(d, post.s, post.rho);
    if (static_cast<int>(eps.size()) != d) {
        fail(Errc::InvalidArgument, "eps dimension " + format_u64(eps.size()) + " does not match posterior " +
                                        format_int(d));
    }
    const auto l = ar1_cholesky(d, post.s, post.rho);
    std::vector<double> z(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        double acc = post.mu[static_cast<std::size_t>(i)];
        for (int j = 0; j <= i; ++j) acc += l[static_cast<std::size_t>(i) * d + j] * eps[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(i)] = acc;
    }
    return z;
}

double kl_diag(const std::vector<double>& mu, const std::vector<double>& s_vec, const PriorSpec& prior) {
    const int d = static_cast<int>(mu.size());
    if (d < 1 || s_vec.size() != mu.size()) {
        fail(Errc::InvalidArgument, "kl_diag needs matching nonempty mu and s vectors");
    }
    check_prior(prior, d);
    const double ps2 = prior.sigma * prior.sigma;
    double kl = 0.0;
    for (int i = 0; i < d; ++i) {
        const double s = s_vec[static_cast<std::size_t>(i)];
        if (!(s > 0.0)) fail(Errc::InvalidArgument, "kl_diag variance entries must be positive");
        const double dm = mu[static_cast<std::size_t>(i)] - prior.mu[static_cast<std::size_t>(i)];
        kl += 0.5 * (s / ps2 + dm * dm / ps2 - 1.0 + std::log(ps2 / s));
    }
    return kl;
}

double kl_ar1(const LatentPosterior& post, const PriorSpec& prior) {
    const int d = post.d();
    check_ar1_args(d, post.s, post.rho);
    check_prior(prior, d);
    const double ps2 = prior.sigma * prior.sigma;
    double dm2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double dm = post.mu[static_cast<std::size_t>(i)] - prior.mu[static_cast<std::size_t>(i)];
        dm2 += dm * dm;
    }
    // 0.5 [ tr(C)/ps2 + ||dm||^2/ps2 - d + ln(det(ps2 I)/det C) ] with
    // tr(C) = d s and ln det C = d ln s + (d-1) ln(1-rho^2).
    return 0.5 * (d * post.s / ps2 + dm2 / ps2 - d + d * std::log(ps2 / post.s) -
                  (d - 1) * std::log1p(-post.rho * post.rho));
}

KlGrads kl_ar1_grads(const LatentPosterior& post, const PriorSpec& prior) {
    const int d = post.d();
    check_ar1_args(d, post.s, post.rho);
    check_prior(prior, d);
    const double ps2 = prior.sigma * prior.sigma;
    KlGrads g;
    g.dmu.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        g.dmu[static_cast<std::size_t>(i)] =
            (post.mu[static_cast<std::size_t>(i)] - prior.mu[static_cast<std::size_t>(i)]) / ps2;
    }
    g.ds = 0.5 * (d / ps2 - d / post.s);
    g.drho = (d - 1) * post.rho / (1.0 - post.rho * post.rho);
    return g;
}

namespace {

struct PairMoments {
    double ma = 0.0, mb = 0.0;  // mean deviations from mu
    double aa = 0.0, bb = 0.0, ab = 0.0;  // mean squared deviations / cross term
};

PairMoments pair_moments(const std::vector<double>& x, int W, const LatentPosterior& post) {
    if (post.d() != 2) fail(Errc::InvalidArgument, "pair consistency term needs a 2-d posterior");
    if (W < 1 || x.size() != static_cast<std::size_t>(2 * W)) {
        fail(Errc::InvalidArgument, "pair_nll input size must be 2*W");
    }
    PairMoments m;
    for (int t = 0; t < W; ++t) {
        const double a = x[static_cast<std::size_t>(t)] - post.mu[0];
        const double b = x[static_cast<std::size_t>(W + t)] - post.mu[1];
        m.ma += a;
        m.mb += b;
        m.aa += a * a;
        m.bb += b * b;
        m.ab += a * b;
    }
    const double inv = 1.0 / W;
    m.ma *= inv;
    m.mb *= inv;
    m.aa *= inv;
    m.bb *= inv;
    m.ab *= inv;
    return m;
}

}  // namespace

double pair_nll(const std::vector<double>& x, int W, const LatentPosterior& post) {
    check_ar1_args(post.d(), post.s, post.rho);
    const PairMoments m = pair_moments(x, W, post);
    const double q = 1.0 - post.rho * post.rho;
    const double quad = (m.aa + m.bb - 2.0 * post.rho * m.ab) / (2.0 * post.s * q);
    return quad + std::log(post.s) + 0.5 * std::log(q) + std::log(kTwoPi);
}

KlGrads pair_nll_grads(const std::vector<double>& x, int W, const LatentPosterior& post) {
    check_ar1_args(post.d(), post.s, post.rho);
    const PairMoments m = pair_moments(x, W, post);
    const double rho = post.rho;
    const double s = post.s;
    const double q = 1.0 - rho * rho;
    KlGrads g;
    g.dmu = {(rho * m.mb - m.ma) / (s * q), (rho * m.ma - m.mb) / (s * q)};
    const double quad_sum = m.aa + m.bb - 2.0 * rho * m.ab;
    g.ds = -quad_sum / (2.0 * s * s * q) + 1.0 / s;
    g.drho = (-m.ab * q + quad_sum * rho) / (s * q * q) - rho / q;
    return g;
}

VaeSettings VaeSettings::from_config(const Config& cfg) {
    VaeSettings s;
    s.W = static_cast<int>(cfg.integer("training", "window"));
    s.hidden = static_cast<int>(cfg.integer("training", "hidden"));
    s.conv_channels = static_cast<int>(cfg.integer("training", "conv_channels"));
    s.kernel = static_cast<int>(cfg.integer("training", "kernel"));
    s.latent_samples = static_cast<int>(cfg.integer("training", "latent_samples"));
    s.eval_latent_samples = static_cast<int>(cfg.integer("training", "eval_latent_samples"));
    s.epochs = static_cast<int>(cfg.integer("training", "epochs"));
    s.batch_size = static_cast<int>(cfg.integer("training", "batch_size"));
    s.learning_rate = cfg.num("training", "learning_rate");
    s.momentum = cfg.num("training", "momentum");
    s.grad_clip = cfg.num("training", "grad_clip");
    s.mu_prior = cfg.num("training", "mu_prior");
    s.sigma_prior = cfg.num("training", "sigma_prior");
    return s;
}

namespace {

void validate_settings(const VaeSettings& s) {
    if (s.W < 4) fail(Errc::InvalidArgument, "window length must be at least 4");
    if (s.hidden < 1 || s.conv_channels < 1) fail(Errc::InvalidArgument, "network widths must be positive");
    if (s.kernel < 1 || s.kernel % 2 == 0) {
        fail(Errc::InvalidArgument, "kernel must be odd so convolutions preserve window length");
    }
    if (s.latent_samples < 1 || s.eval_latent_samples < 1) {
        fail(Errc::InvalidArgument, "latent sample counts must be positive");
    }
    // epochs 0 is allowed: train() then just marks the initialized model.
    if (s.epochs < 0 || s.batch_size < 1) fail(Errc::InvalidArgument, "epochs must be nonnegative and batch_size positive");
    if (!(s.learning_rate > 0.0)) fail(Errc::InvalidArgument, "learning_rate must be positive");
    if (!(s.momentum >= 0.0 && s.momentum < 1.0)) fail(Errc::InvalidArgument, "momentum must be in [0, 1)");
    if (!(s.grad_clip > 0.0)) fail(Errc::InvalidArgument, "grad_clip must be positive");
    if (!(s.sigma_prior > 0.0)) fail(Errc::InvalidArgument, "sigma_prior must be positive");
}

Network build_encoder(const VaeSettings& s) {
    const int pad = (s.kernel - 1) / 2;
    Network net;
    net.add(std::make_unique<Conv1d>(2, s.conv_channels, s.kernel, s.W, pad));
    net.add(std::make_unique<Relu>(s.conv_channels * s.W));
    net.add(std::make_unique<Conv1d>(s.conv_channels, s.conv_channels, s.kernel, s.W, pad));
    net.add(std::make_unique<Relu>(s.conv_channels * s.W));
    net.add(std::make_unique<Dense>(s.conv_channels * s.W, s.hidden));
    net.add(std::make_unique<Relu>(s.hidden));
    net.add(std::make_unique<Dense>(s.hidden, CorrelatedVae::kLatentDim + 2));
    return net;
}

Network build_decoder(const VaeSettings& s) {
    Network net;
    net.add(std::make_unique<Dense>(CorrelatedVae::kLatentDim, s.hidden));
    net.add(std::make_unique<Relu>(s.hidden));
    net.add(std::make_unique<Dense>(s.hidden, 2 * s.W));
    return net;
}

}  // namespace

CorrelatedVae::CorrelatedVae(const VaeSettings& settings, const Normalization& norm)
    : settings_(settings), norm_(norm) {
    validate_settings(settings_);
    prior_ = PriorSpec::isotropic(kLatentDim, settings_.mu_prior, settings_.sigma_prior);
    encoder_ = build_encoder(settings_);
    decoder_ = build_decoder(settings_);
}

void CorrelatedVae::init_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "vae-params"));
    encoder_.init(rng);
    decoder_.init(rng);
}

LatentPosterior CorrelatedVae::heads_to_posterior(const std::vector<double>& heads) const {
    // heads = [mu_1, mu_2, a, b]; the maps keep s > 0 and |rho| < 1 for any
    // real-valued network output. tanh rounds to exactly 1 past |b| ~ 19 and
    // exp(a) under/overflows past |a| ~ 709, so clamp both just inside their
    // domains; the divergence check then reports the blow-up instead of a
    // domain error from the covariance routines.
    LatentPosterior p;
    p.mu = {heads[0], heads[1]};
    p.s = std::exp(std::clamp(heads[2], -30.0, 30.0));
    p.rho = std::clamp(std::tanh(heads[3]), -1.0 + 1e-12, 1.0 - 1e-12);
    return p;
}

CorrelatedVae::ElboParts CorrelatedVae::elbo_backprop(const std::vector<double>& x,
                                                      const std::vector<std::vector<double>>& eps,
                                                      double grad_scale) {
    const bool with_grads = grad_scale != 0.0;
    if (x.size() != static_cast<std::size_t>(2 * settings_.W)) {
        fail(Errc::InvalidArgument, "elbo input size " + format_u64(x.size()) + " does not match 2*W = " +
                                        format_int(2 * settings_.W));
    }
    if (eps.empty()) fail(Errc::InvalidArgument, "elbo needs at least one latent sample");
    const double l_count = static_cast<double>(eps.size());

    const auto heads = encoder_.forward(x);
    ElboParts parts;
    parts.post = heads_to_posterior(heads);
    const double s = parts.post.s;
    const double rho = parts.post.rho;
    const double root_s = std::sqrt(s);
    const double innov = std::sqrt(1.0 - rho * rho);

    std::vector<double> gheads(4, 0.0);
    std::vector<double> gout(x.size());
    double recon_sum = 0.0;
    for (const auto& e : eps) {
        if (e.size() != static_cast<std::size_t>(kLatentDim)) fail(Errc::InvalidArgument, "latent noise draws must have dimension 2");
        const double mix = rho * e[0] + innov * e[1];
        const double z1 = parts.post.mu[0] + root_s * e[0];
        const double z2 = parts.post.mu[1] + root_s * mix;
        const auto xh = decoder_.forward({z1, z2});
        double sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) sq += (xh[i] - x[i]) * (xh[i] - x[i]);
        recon_sum += 0.5 * sq;
        if (!with_grads) continue;
        for (std::size_t i = 0; i < x.size(); ++i) gout[i] = (xh[i] - x[i]) * (grad_scale / l_count);
        const auto gz = decoder_.backward(gout);
        gheads[0] += gz[0];
        gheads[1] += gz[1];
        const double gs = (gz[0] * e[0] + gz[1] * mix) / (2.0 * root_s);
        const double grho = gz[1] * root_s * (e[0] - rho / innov * e[1]);
        gheads[2] += gs * s;                  // s = exp(a)
        gheads[3] += grho * (1.0 - rho * rho);  // rho = tanh(b)
    }
    parts.recon = recon_sum / l_count;
    parts.kl = kl_ar1(parts.post, prior_);
    parts.loss_train = parts.recon + parts.kl;
    parts.loss_full = parts.loss_train + 0.5 * static_cast<double>(x.size()) * std::log(kTwoPi);

    if (with_grads) {
        const KlGrads kg = kl_ar1_grads(parts.post, prior_);
        gheads[0] += grad_scale * kg.dmu[0];
        gheads[1] += grad_scale * kg.dmu[1];
        gheads[2] += grad_scale * kg.ds * s;
        gheads[3] += grad_scale * kg.drho * (1.0 - rho * rho);
        encoder_.backward(gheads);
    }
    return parts;
}

CorrelatedVae::ElboParts CorrelatedVae::elbo_eval(const std::vector<double>& x,
                                                  const std::vector<std::vector<double>>& eps) {
    return elbo_backprop(x, eps, 0.0);
}

std::vector<CorrelatedVae::EpochRow> CorrelatedVae::train(const std::vector<InputWindow>& windows,
                                                          std::uint64_t seed) {
    if (windows.empty()) fail(Errc::InvalidArgument, "cannot train on an empty window set");
    for (const auto& w : windows) {
        if (w.W != settings_.W) {
            fail(Errc::InvalidArgument, "window length " + format_int(w.W) + " does not match model W " +
                                            format_int(settings_.W));
        }
    }
    init_params(derive_seed(seed, "init"));
    Rng rng(derive_seed(seed, "sgd"));
    SgdMomentum opt_enc(settings_.learning_rate, settings_.momentum);
    SgdMomentum opt_dec(settings_.learning_rate, settings_.momentum);

    const std::size_t n = windows.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<std::vector<double>> eps(static_cast<std::size_t>(settings_.latent_samples),
                                         std::vector<double>(kLatentDim));

    std::vector<EpochRow> curve;
    curve.reserve(static_cast<std::size_t>(settings_.epochs));
    for (int epoch = 1; epoch <= settings_.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        EpochRow row;
        row.epoch = epoch;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(settings_.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(settings_.batch_size));
            const double batch_n = static_cast<double>(stop - start);
            encoder_.zero_grads();
            decoder_.zero_grads();
            for (std::size_t i = start; i < stop; ++i) {
                const std::vector<double>& x = windows[order[i]].values;
                for (auto& e : eps) {
                    for (int k = 0; k < kLatentDim; ++k) {
                        e[static_cast<std::size_t>(k)] =
                            prior_.mu[static_cast<std::size_t>(k)] + prior_.sigma * rng.normal();
                    }
                }
                const ElboParts parts = elbo_backprop(x, eps, 1.0 / batch_n);

                // Consistency term: adds its head gradients through a second
                // encoder backward over the same cached forward pass. Weighted
                // by W (the window's summed pair log-likelihood) so it balances
                // the prior pull per pair, not per window; a lighter weight
                // shrinks posterior means toward the prior and biases the
                // delay laws read off the posterior.
                const double wfit = static_cast<double>(settings_.W);
                const double fit = wfit * pair_nll(x, settings_.W, parts.post);
                const KlGrads fg = pair_nll_grads(x, settings_.W, parts.post);
                const double jac_rho = 1.0 - parts.post.rho * parts.post.rho;
                const double cf = wfit / batch_n;
                encoder_.backward({cf * fg.dmu[0], cf * fg.dmu[1],
                                   cf * fg.ds * parts.post.s, cf * fg.drho * jac_rho});

                if (!std::isfinite(parts.loss_train + fit)) {
                    fail(Errc::Runtime, "training diverged: non-finite loss at epoch " + format_int(epoch) +
                                            ", window " + format_u64(order[i]));
                }
                // The reported curve tracks the bound itself; the consistency
                // term has an irreducible floor that would mask its progress.
                row.mean_loss += parts.loss_train;
                row.mean_rho += parts.post.rho;
                row.mean_s += parts.post.s;
            }
            // One pathological batch (a far tail window early in training)
            // can throw the weights past recovery; a norm clip bounds the
            // step while leaving healthy batches untouched.
            const double gnorm = clip_grad_norm({&encoder_, &decoder_}, settings_.grad_clip);
            if (!std::isfinite(gnorm)) {
                fail(Errc::Runtime,
                     "training diverged: non-finite gradients at epoch " + format_int(epoch));
            }
            opt_enc.step(encoder_);
            opt_dec.step(decoder_);
        }
        row.mean_loss /= static_cast<double>(n);
        row.mean_rho /= static_cast<double>(n);
        row.mean_s /= static_cast<double>(n);
        curve.push_back(row);
    }
    trained_ = true;
    return curve;
}

LatentPosterior CorrelatedVae::posterior(const InputWindow& w) {
    if (w.W != settings_.W) {
        fail(Errc::InvalidArgument, "window length " + format_int(w.W) + " does not match model W " +
                                        format_int(settings_.W));
    }
    return heads_to_posterior(encoder_.forward(w.values));
}

double CorrelatedVae::mean_rho(const std::vector<InputWindow>& windows) {
    if (windows.empty()) fail(Errc::InvalidArgument, "mean_rho needs at least one window");
    double acc = 0.0;
    for (const auto& w : windows) acc += posterior(w).rho;
    return acc / static_cast<double>(windows.size());
}

CorrelatedVae::DelayLaw CorrelatedVae::e2e_delay_distribution(const InputWindow& w) {
    if (!trained_) fail(Errc::Validation, "model is not trained; train it or load a trained checkpoint");
    const LatentPosterior p = posterior(w);
    // tau = (m0 + s0 z1) + (m1 + s1 z2) with (z1, z2) ~ N(mu, s R(rho)).
    DelayLaw law;
    law.mean_ms = norm_.mean[0] + norm_.mean[1] + norm_.std[0] * p.mu[0] + norm_.std[1] * p.mu[1];
    law.var_ms2 = p.s * (norm_.std[0] * norm_.std[0] + norm_.std[1] * norm_.std[1]) +
                  2.0 * p.rho * p.s * norm_.std[0] * norm_.std[1];
    return law;
}

std::vector<std::array<double, 2>> CorrelatedVae::sample_latent(const InputWindow& w, int n, std::uint64_t seed) {
    if (n < 1) fail(Errc::InvalidArgument, "latent sample count must be positive");
    const LatentPosterior p = posterior(w);
    const double root_s = std::sqrt(p.s);
    const double innov = std::sqrt(1.0 - p.rho * p.rho);
    Rng rng(derive_seed(seed, "latent-scatter"));
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
    for (auto& z : out) {
        const double e1 = rng.normal();
        const double e2 = rng.normal();
        z[0] = p.mu[0] + root_s * e1;
        z[1] = p.mu[1] + root_s * (p.rho * e1 + innov * e2);
    }
    return out;
}

std::string CorrelatedVae::save() const {
    std::string out = "mecvae 1\n";
    out += "w " + format_int(settings_.W) + "\n";
    out += "hidden " + format_int(settings_.hidden) + "\n";
    out += "conv_channels " + format_int(settings_.conv_channels) + "\n";
    out += "kernel " + format_int(settings_.kernel) + "\n";
    out += "latent_samples " + format_int(settings_.latent_samples) + "\n";
    out += "eval_latent_samples " + format_int(settings_.eval_latent_samples) + "\n";
    out += std::string("trained ") + (trained_ ? "1" : "0") + "\n";
    out += "prior " + format_double_hex(prior_.mu[0]) + " " + format_double_hex(prior_.mu[1]) + " " +
           format_double_hex(prior_.sigma) + "\n";
    out += "norm " + format_double_hex(norm_.mean[0]) + " " + format_double_hex(norm_.mean[1]) + " " +
           format_double_hex(norm_.std[0]) + " " + format_double_hex(norm_.std[1]) + "\n";
    const std::string enc = save_network(encoder_);
    const std::string dec = save_network(decoder_);
    out += "encoder\n" + enc + "decoder\n" + dec;
    return out;
}

CorrelatedVae CorrelatedVae::load(const std::string& text, std::string_view origin) {
    const auto lines = split(text, '\n');
    std::size_t li = 0;
    auto next_line = [&]() -> std::string {
        while (li < lines.size()) {
            std::string s(trim(lines[li]));
            ++li;
            if (!s.empty()) return s;
        }
        fail(Errc::Validation, std::string(origin) + ": truncated model checkpoint");
    };
    auto expect_kv = [&](const char* key) -> std::vector<std::string> {
        auto parts = split(next_line(), ' ');
        if (parts.size() < 2 || parts[0] != key) {
            fail(Errc::Validation, std::string(origin) + ":" + format_u64(li) + ": expected '" + key + "' line");
        }
        parts.erase(parts.begin());
        return parts;
    };

    if (next_line() != "mecvae 1") fail(Errc::Validation, std::string(origin) + ": not a mecvae version 1 file");
    VaeSettings s;
    const std::string where = std::string(origin);
    s.W = static_cast<int>(parse_int(expect_kv("w").at(0), where + " w"));
    s.hidden = static_cast<int>(parse_int(expect_kv("hidden").at(0), where + " hidden"));
    s.conv_channels = static_cast<int>(parse_int(expect_kv("conv_channels").at(0), where + " conv_channels"));
    s.kernel = static_cast<int>(parse_int(expect_kv("kernel").at(0), where + " kernel"));
    s.latent_samples = static_cast<int>(parse_int(expect_kv("latent_samples").at(0), where + " latent_samples"));
    s.eval_latent_samples =
        static_cast<int>(parse_int(expect_kv("eval_latent_samples").at(0), where + " eval_latent_samples"));
    const bool trained = parse_int(expect_kv("trained").at(0), where + " trained") != 0;
    const auto prior_parts = expect_kv("prior");
    if (prior_parts.size() != 3) fail(Errc::Validation, where + ": prior line needs 3 values");
    const auto norm_parts = expect_kv("norm");
    if (norm_parts.size() != 4) fail(Errc::Validation, where + ": norm line needs 4 values");
    s.mu_prior = parse_double_hex(prior_parts[0], where + " prior");
    s.sigma_prior = parse_double_hex(prior_parts[2], where + " prior");

    Normalization norm;
    norm.mean[0] = parse_double_hex(norm_parts[0], where + " norm");
    norm.mean[1] = parse_double_hex(norm_parts[1], where + " norm");
    norm.std[0] = parse_double_hex(norm_parts[2], where + " norm");
    norm.std[1] = parse_double_hex(norm_parts[3], where + " norm");

    CorrelatedVae model(s, norm);
    model.prior_.mu = {parse_double_hex(prior_parts[0], where + " prior"),
                       parse_double_hex(prior_parts[1], where + " prior")};
    model.prior_.sigma = parse_double_hex(prior_parts[2], where + " prior");

    if (next_line() != "encoder") fail(Errc::Validation, where + ": expected 'encoder' section");
    std::string enc_text;
    while (li < lines.size() && trim(lines[li]) != "decoder") {
        enc_text += lines[li];
        enc_text += '\n';
        ++li;
    }
    if (li >= lines.size()) fail(Errc::Validation, where + ": expected 'decoder' section");
    ++li;  // skip the marker
    std::string dec_text;
    while (li < lines.size()) {
        dec_text += lines[li];
        dec_text += '\n';
        ++li;
    }
    model.encoder_ = load_network(enc_text, where + " encoder");
    model.decoder_ = load_network(dec_text, where + " decoder");
    if (model.encoder_.in_size() != static_cast<std::size_t>(2 * s.W) ||
        model.encoder_.out_size() != static_cast<std::size_t>(kLatentDim + 2)) {
        fail(Errc::Validation, where + ": encoder shape does not match header");
    }
    if (model.decoder_.in_size() != static_cast<std::size_t>(kLatentDim) || model.decoder_.out_size() != static_cast<std::size_t>(2 * s.W)) {
        fail(Errc::Validation, where + ": decoder shape does not match header");
    }
    model.trained_ = trained;
    return model;
}

void CorrelatedVae::save_file(const std::string& path) const { write_text_file(path, save()); }

CorrelatedVae CorrelatedVae::load_file(const std::string& path) { return load(read_text_file(path), path); }

std::string training_metrics_csv(const std::vector<CorrelatedVae::EpochRow>& rows) {
    CsvWriter w({"epoch", "mean_loss", "mean_rho", "mean_s"});
    for (const auto& r : rows) {
        w.row({format_int(r.epoch), format_double(r.mean_loss), format_double(r.mean_rho),
               format_double(r.mean_s)});
    }
    return w.str();
}

}  // namespace mecsim
