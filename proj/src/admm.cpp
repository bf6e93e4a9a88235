#include "varblur/admm.hpp"

#include <algorithm>
#include <cmath>

#include "varblur/shake.hpp"

namespace varblur {

AdmmSchedule AdmmSchedule::defaults(int iterations, double sigma, double beta_start,
                                    double beta_end, double gamma_step, double mu_start,
                                    double mu_end) {
    if (iterations < 1) throw ValidationError("schedule needs at least one iteration");
    AdmmSchedule s;
    s.sigma = std::max(sigma, 1e-6);
    s.alpha.resize(iterations);
    s.beta.resize(iterations);
    s.gamma.assign(iterations, gamma_step);
    for (int i = 0; i < iterations; ++i) {
        const double t = iterations == 1 ? 0.0 : static_cast<double>(i) / (iterations - 1);
        s.beta[i] = beta_start * std::pow(beta_end / beta_start, t);
        const double mu = mu_start * std::pow(mu_end / mu_start, t);
        s.alpha[i] = s.sigma * s.sigma * mu;
    }
    return s;
}

ValidationReport validate(const AdmmSchedule& s) {
    const std::size_t n = s.alpha.size();
    if (n == 0) return ValidationReport::fail("schedule must have at least one iteration");
    if (s.beta.size() != n || s.gamma.size() != n)
        return ValidationReport::fail("schedule vectors must share one length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s.alpha[i] > 0.0) || !(s.beta[i] > 0.0) || !(s.gamma[i] > 0.0))
            return ValidationReport::fail("schedule entries must be positive (iteration " +
                                          std::to_string(i) + ")");
    }
    if (!(s.sigma > 0.0)) return ValidationReport::fail("schedule sigma must be positive");
    if (s.lipschitz < 0.0) return ValidationReport::fail("lipschitz must be >= 0");
    return ValidationReport::pass();
}

namespace {

// Chambolle dual projection for min_p 1/2 ||p - x||^2 + beta TV_iso(p),
// one channel. tau = 1/4 is the classic step.
void tv_prox_plane(const double* x, double* out, int h, int w, double beta, int iters) {
    const std::size_t n = static_cast<std::size_t>(h) * w;
    std::vector<double> px(n, 0.0), py(n, 0.0), div(n, 0.0);
    const double tau = 0.25;
    auto idx = [w](int y, int xx) { return static_cast<std::size_t>(y) * w + xx; };
    for (int it = 0; it < iters; ++it) {
        // divergence of p (adjoint of the forward-difference gradient)
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                double d = 0.0;
                if (xx < w - 1) d += px[idx(y, xx)];
                if (xx > 0) d -= px[idx(y, xx - 1)];
                if (y < h - 1) d += py[idx(y, xx)];
                if (y > 0) d -= py[idx(y - 1, xx)];
                div[idx(y, xx)] = d;
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                const std::size_t i = idx(y, xx);
                const double base = div[i] - x[i] / beta;
                const double right = xx < w - 1 ? (div[idx(y, xx + 1)] - x[idx(y, xx + 1)] / beta) : base;
                const double down = y < h - 1 ? (div[idx(y + 1, xx)] - x[idx(y + 1, xx)] / beta) : base;
                const double gx = right - base;
                const double gy = down - base;
                const double nx = px[i] + tau * gx;
                const double ny = py[i] + tau * gy;
                const double mag = 1.0 + tau * std::sqrt(gx * gx + gy * gy);
                px[i] = nx / mag;
                py[i] = ny / mag;
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double d = 0.0;
            if (xx < w - 1) d += px[idx(y, xx)];
            if (xx > 0) d -= px[idx(y, xx - 1)];
            if (y < h - 1) d += py[idx(y, xx)];
            if (y > 0) d -= py[idx(y - 1, xx)];
            out[idx(y, xx)] = x[idx(y, xx)] - beta * d;
        }
    }
}

}  // namespace

PriorProx tv_prox(int inner_iterations) {
    return PriorProx{
        "tv", [inner_iterations](const Image& x, double strength) {
            if (strength <= 0.0) return x;
            Image out = x;
            for (int c = 0; c < x.channels; ++c)
                tv_prox_plane(x.plane(c).data(), out.plane(c).data(), x.height, x.width,
                              strength, inner_iterations);
            return out;
        }};
}

PriorProx gaussian_prox(double sigma_per_strength) {
    return PriorProx{
        "gaussian", [sigma_per_strength](const Image& x, double strength) {
            const double sigma = sigma_per_strength * strength;
            if (sigma < 1e-8) return x;
            return convolve(x, gaussian_kernel(sigma));
        }};
}

PriorProx identity_prox() {
    return PriorProx{"identity", [](const Image& x, double) { return x; }};
}

Image x_update(const AdmmState& state, const BlurOperator& op, const PriorProx& prox,
               double beta_k, double gamma_k) {
    Image hx = apply(op, state.x);
    if (!hx.same_shape(state.z) || !hx.same_shape(state.d))
        throw ValidationError("x_update: state dims do not match the operator output");
    for (std::size_t i = 0; i < hx.data.size(); ++i)
        hx.data[i] = hx.data[i] - state.z.data[i] + state.d.data[i];
    const Image grad = adjoint(op, hx);
    Image stepped = state.x;
    for (std::size_t i = 0; i < stepped.data.size(); ++i)
        stepped.data[i] -= gamma_k * grad.data[i];
    return prox(stepped, beta_k);
}

Image z_update(const Image& hx_plus_d, const Image& y, double alpha_k) {
    if (!hx_plus_d.same_shape(y)) throw ValidationError("z_update: dims differ");
    Image z = y;
    for (std::size_t i = 0; i < z.data.size(); ++i)
        z.data[i] = (y.data[i] + alpha_k * hx_plus_d.data[i]) / (alpha_k + 1.0);
    return z;
}

Image z_update_saturated(const Image& z_prev, const Image& hx_plus_d, const Image& y,
                         double alpha_k, double sigma, double lipschitz,
                         const SaturationParams& params) {
    if (!z_prev.same_shape(y) || !hx_plus_d.same_shape(y))
        throw ValidationError("z_update_saturated: dims differ");
    if (!(lipschitz > 0.0)) throw ValidationError("z_update_saturated: lipschitz must be > 0");
    if (!(sigma > 0.0)) throw ValidationError("z_update_saturated: sigma must be > 0");
    const double s2 = sigma * sigma;
    const double mu = alpha_k / s2;  // the formula's coupling weight beta
    const double denom = (lipschitz + mu) * s2;
    Image z = y;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        const double zk = z_prev.data[i];
        const double r = saturation_response(zk, params);
        const double rp = saturation_response_deriv(zk, params);
        z.data[i] = ((y.data[i] - r) * rp + s2 * lipschitz * zk + alpha_k * hx_plus_d.data[i]) / denom;
    }
    return z;
}

Image d_update(const Image& d, const Image& hx, const Image& z) {
    if (!d.same_shape(hx) || !d.same_shape(z)) throw ValidationError("d_update: dims differ");
    Image out = d;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += hx.data[i] - z.data[i];
    return out;
}

double estimate_saturated_lipschitz(const Image& y, double sigma, const SaturationParams& params) {
    double max_resid = 0.0;
    for (double v : y.data)
        max_resid = std::max(max_resid, std::abs(saturation_response(v, params) - v));
    const double bound = 1.0 + (params.a / 4.0) * max_resid;
    return 2.0 * bound / (sigma * sigma);
}

DeconvolveResult deconvolve(const Image& y, const BlurOperator& op, const AdmmSchedule& schedule,
                            const PriorProx& prox, bool saturated, const SaturationParams& params) {
    auto sr = validate(schedule);
    if (!sr.ok) throw ValidationError(sr.message);
    if (y.height != op.out_height() || y.width != op.out_width())
        throw ValidationError("deconvolve: observation dims do not match the operator output");

    AdmmState state;
    if (op.downsample == 1) {
        state.x = y;
    } else {
        state.x = adjoint(op, y);
        const double scale = static_cast<double>(op.downsample) * op.downsample;
        for (double& v : state.x.data) v *= scale;
    }
    state.z = y;
    state.d = Image(y.height, y.width, y.channels, 0.0, y.encoding);

    const double lipschitz = schedule.lipschitz > 0.0
                                 ? schedule.lipschitz
                                 : estimate_saturated_lipschitz(y, schedule.sigma, params);

    DeconvolveResult result;
    result.residuals.reserve(schedule.iterations());
    for (int k = 0; k < schedule.iterations(); ++k) {
        state.x = x_update(state, op, prox, schedule.beta[k], schedule.gamma[k]);
        const Image hx = apply(op, state.x);
        Image hx_plus_d = hx;
        for (std::size_t i = 0; i < hx_plus_d.data.size(); ++i)
            hx_plus_d.data[i] += state.d.data[i];
        state.z = saturated
                      ? z_update_saturated(state.z, hx_plus_d, y, schedule.alpha[k],
                                           schedule.sigma, lipschitz, params)
                      : z_update(hx_plus_d, y, schedule.alpha[k]);
        state.d = d_update(state.d, hx, state.z);

        double ss = 0.0;
        for (std::size_t i = 0; i < hx.data.size(); ++i) {
            const double r = hx.data[i] - y.data[i];
            ss += r * r;
        }
        result.residuals.push_back(std::sqrt(ss));
    }
    for (double& v : state.x.data) v = std::clamp(v, 0.0, 1.0);
    result.x = std::move(state.x);
    return result;
}

}  // namespace varblur
