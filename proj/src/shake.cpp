#include "varblur/shake.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "varblur/rng.hpp"

namespace varblur {

namespace {

constexpr double kExposureSeconds = 0.5;
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Trajectory {
    std::vector<double> x, y;
};

// One underdamped oscillator axis driven by Gaussian increments,
// Euler-Maruyama, with a burn-in so the start point is not special.
void simulate_axis(Rng& rng, double omega, double zeta, int steps, std::vector<double>& out) {
    const double dt = kExposureSeconds / steps;
    const double sdt = std::sqrt(dt);
    const int burn_in = steps / 4;
    double pos = 0.0, vel = 0.0;
    out.resize(steps);
    for (int i = -burn_in; i < steps; ++i) {
        const double accel = -omega * omega * pos - 2.0 * zeta * omega * vel;
        vel += accel * dt + omega * sdt * rng.normal();
        pos += vel * dt;
        if (i >= 0) out[i] = pos;
    }
}

Trajectory simulate_trajectory(Rng& rng, const ShakeParams& p) {
    Trajectory t;
    const double fx = rng.uniform(p.tremor_low_hz, p.tremor_high_hz);
    const double fy = rng.uniform(p.tremor_low_hz, p.tremor_high_hz);
    simulate_axis(rng, kTwoPi * fx, p.damping, p.exposure_steps, t.x);
    simulate_axis(rng, kTwoPi * fy, p.damping, p.exposure_steps, t.y);
    return t;
}

void center_and_normalize(Trajectory& t) {
    const int n = static_cast<int>(t.x.size());
    const double mx = std::accumulate(t.x.begin(), t.x.end(), 0.0) / n;
    const double my = std::accumulate(t.y.begin(), t.y.end(), 0.0) / n;
    double rms = 0.0;
    for (int i = 0; i < n; ++i) {
        t.x[i] -= mx;
        t.y[i] -= my;
        rms += t.x[i] * t.x[i] + t.y[i] * t.y[i];
    }
    rms = std::sqrt(rms / n);
    if (rms > 0.0) {
        for (int i = 0; i < n; ++i) {
            t.x[i] /= rms;
            t.y[i] /= rms;
        }
    }
}

double max_abs_coord(const Trajectory& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i)
        m = std::max(m, std::max(std::abs(t.x[i]), std::abs(t.y[i])));
    return m;
}

// Bilinear deposit of unit mass split over the samples; positions are
// relative to the kernel center. Callers guarantee taps stay in bounds.
Kernel rasterize(const std::vector<double>& px, const std::vector<double>& py, int k) {
    std::vector<double> taps(static_cast<std::size_t>(k) * k, 0.0);
    const int c = k / 2;
    const double mass = 1.0 / static_cast<double>(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double gx = px[i] + c, gy = py[i] + c;
        const int x0 = static_cast<int>(std::floor(gx));
        const int y0 = static_cast<int>(std::floor(gy));
        const double fx = gx - x0, fy = gy - y0;
        const double w00 = (1.0 - fy) * (1.0 - fx), w01 = (1.0 - fy) * fx;
        const double w10 = fy * (1.0 - fx), w11 = fy * fx;
        auto deposit = [&](int yy, int xx, double wgt) {
            if (wgt == 0.0) return;
            if (yy < 0 || yy >= k || xx < 0 || xx >= k)
                throw ValidationError("rasterized tap out of kernel support");
            taps[static_cast<std::size_t>(yy) * k + xx] += wgt * mass;
        };
        deposit(y0, x0, w00);
        deposit(y0, x0 + 1, w01);
        deposit(y0 + 1, x0, w10);
        deposit(y0 + 1, x0 + 1, w11);
    }
    const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& v : taps) v /= sum;
    return Kernel(k, std::move(taps));
}

}  // namespace

ValidationReport validate(const ShakeParams& p) {
    if (p.k <= 0 || p.k % 2 == 0) return ValidationReport::fail("kernel side must be odd and positive");
    if (p.exposure_steps < 2) return ValidationReport::fail("exposure_steps must be >= 2");
    if (!(p.tremor_low_hz > 0.0) || !(p.tremor_high_hz >= p.tremor_low_hz))
        return ValidationReport::fail("tremor band must satisfy 0 < low <= high");
    if (!(p.damping > 0.0) || !(p.damping < 1.0))
        return ValidationReport::fail("damping must be in (0, 1)");
    return ValidationReport::pass();
}

Kernel generate_shake_kernel(const ShakeParams& p) {
    auto r = validate(p);
    if (!r.ok) throw ValidationError(r.message);
    double amplitude = p.amplitude_scale < 0.0 ? p.k / 5.0 : p.amplitude_scale;
    // Strict-interior bound: bilinear taps from |coord| <= (K-1)/2 - 1.5
    // stay one cell away from the border, so the support bounding box is < K.
    const double fit_bound = std::max(0.0, (p.k - 1) / 2.0 - 1.5);
    Rng rng(p.seed);

    while (amplitude > 1e-6) {
        for (int attempt = 0; attempt < 6; ++attempt) {
            Trajectory t = simulate_trajectory(rng, p);
            center_and_normalize(t);
            for (std::size_t i = 0; i < t.x.size(); ++i) {
                t.x[i] *= amplitude;
                t.y[i] *= amplitude;
            }
            if (max_abs_coord(t) <= fit_bound) return rasterize(t.x, t.y, p.k);
        }
        amplitude *= 0.7;
    }
    return Kernel::delta(p.k);
}

Kernel line_kernel(int length, double angle, int k) {
    if (k <= 0 || k % 2 == 0) throw ValidationError("kernel side must be odd and positive");
    if (length < 1) throw ValidationError("line length must be >= 1");
    if (length > k) throw ValidationError("line length exceeds kernel side");
    const double cx = std::cos(angle), sy = std::sin(angle);
    std::vector<double> px(length), py(length);
    for (int i = 0; i < length; ++i) {
        const double s = i - (length - 1) / 2.0;
        px[i] = s * cx;
        py[i] = s * sy;
    }
    return rasterize(px, py, k);
}

Kernel gaussian_kernel(double sigma, int k) {
    if (sigma < 0.0) throw ValidationError("sigma must be >= 0");
    if (k == 0) k = sigma > 0.0 ? 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1 : 1;
    if (k <= 0 || k % 2 == 0) throw ValidationError("kernel side must be odd and positive");
    if (sigma == 0.0) return Kernel::delta(k);
    std::vector<double> taps(static_cast<std::size_t>(k) * k);
    const int c = k / 2;
    double sum = 0.0;
    for (int r = 0; r < k; ++r) {
        for (int q = 0; q < k; ++q) {
            const double dy = r - c, dx = q - c;
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            taps[static_cast<std::size_t>(r) * k + q] = v;
            sum += v;
        }
    }
    for (double& v : taps) v /= sum;
    return Kernel(k, std::move(taps));
}

}  // namespace varblur
