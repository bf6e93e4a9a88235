#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varblur/blur_op.hpp"
#include "varblur/types.hpp"

namespace varblur {

/// Per-iteration hyperparameters for the linearized ADMM. alpha_k plays the
/// role sigma^2 * mu_k, beta_k the prior strength sqrt(lambda_k / rho_k),
/// gamma_k the gradient step mu_k / rho_k.
struct AdmmSchedule {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> gamma;
    double lipschitz = 0.0;  // saturated z-update constant; 0 = estimate from data
    double sigma = 0.01;     // noise std the data term assumes

    int iterations() const { return static_cast<int>(alpha.size()); }

    /// Fixed geometric schedule standing in for the paper's learned
    /// hyperparameter block: beta log-spaced beta_start -> beta_end, gamma
    /// constant, alpha_k = sigma^2 * mu_k with mu log-spaced mu_start ->
    /// mu_end.
    static AdmmSchedule defaults(int iterations, double sigma, double beta_start = 0.08,
                                 double beta_end = 0.01, double gamma_step = 1.0,
                                 double mu_start = 1.0, double mu_end = 100.0);
};

ValidationReport validate(const AdmmSchedule& s);

/// Named proximal operator (image, strength beta) -> image, with
/// prox(x, 0) = x.
struct PriorProx {
    std::string name;
    std::function<Image(const Image&, double)> op;

    Image operator()(const Image& x, double strength) const { return op(x, strength); }
};

/// Isotropic total-variation prox solved by Chambolle dual projections.
PriorProx tv_prox(int inner_iterations = 20);

/// Gaussian smoothing with std sigma_per_strength * beta pixels.
PriorProx gaussian_prox(double sigma_per_strength = 20.0);

/// No-op prior.
PriorProx identity_prox();

/// Solver state: latent estimate x, splitting variable z = Hx in the blur
/// output domain, and the scaled dual d (the iteration's u, renamed to avoid
/// clashing with the sharp image u).
struct AdmmState {
    Image x, z, d;
};

/// x_{k+1} = prox_{beta_k}( x_k - gamma_k * H^T (H x_k - z_k + d_k) ).
Image x_update(const AdmmState& state, const BlurOperator& op, const PriorProx& prox,
               double beta_k, double gamma_k);

/// Closed-form data step: (y + alpha_k * hx_plus_d) / (alpha_k + 1), where
/// hx_plus_d = H x_{k+1} + d_k.
Image z_update(const Image& hx_plus_d, const Image& y, double alpha_k);

/// Saturated data step (linearized around z_k):
/// z_{k+1} = ((y - R(z_k)) R'(z_k) + sigma^2 L z_k + alpha_k * hx_plus_d)
///           / ((L + alpha_k / sigma^2) sigma^2).
Image z_update_saturated(const Image& z_prev, const Image& hx_plus_d, const Image& y,
                         double alpha_k, double sigma, double lipschitz,
                         const SaturationParams& params);

/// d_{k+1} = d_k + (H x_{k+1} - z_{k+1}).
Image d_update(const Image& d, const Image& hx, const Image& z);

/// Curvature bound for the saturated data term, evaluated at z0 = y:
/// 2 * (max R'^2 + max|R''| * max|R(y) - y|) / sigma^2 with max R'^2 = 1 and
/// max|R''| = a/4.
double estimate_saturated_lipschitz(const Image& y, double sigma, const SaturationParams& params);

struct DeconvolveResult {
    Image x;                        // final estimate, clipped to [0,1]
    std::vector<double> residuals;  // ||H x_{k+1} - y||_2 per iteration
};

/// Runs the full unrolled iteration from x0 = y (alpha = 1) or
/// x0 = alpha^2 H^T y (alpha > 1), z0 = y, d0 = 0.
DeconvolveResult deconvolve(const Image& y, const BlurOperator& op, const AdmmSchedule& schedule,
                            const PriorProx& prox, bool saturated = false,
                            const SaturationParams& params = {});

}  // namespace varblur
