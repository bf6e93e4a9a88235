#include "varblur/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <mutex>
#include <vector>

#include "varblur/rng.hpp"

namespace varblur {

Image to_gray(const Image& img) {
    if (img.channels == 1) return img;
    Image out(img.height, img.width, 1, 0.0, img.encoding);
    const std::size_t px = static_cast<std::size_t>(img.height) * img.width;
    for (std::size_t i = 0; i < px; ++i)
        out.data[i] = 0.2126 * img.data[i] + 0.7152 * img.data[px + i] +
                      0.0722 * img.data[2 * px + i];
    return out;
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ValidationError("psnr: image shapes differ");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

// 11-tap Gaussian window, sigma 1.5, normalized.
const std::vector<double>& ssim_window() {
    static const std::vector<double> w = [] {
        std::vector<double> v(11);
        double sum = 0.0;
        for (int i = 0; i < 11; ++i) {
            const double d = i - 5;
            v[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += v[i];
        }
        for (double& x : v) x /= sum;
        return v;
    }();
    return w;
}

// Separable valid-region windowed mean: out has dims (h-10) x (w-10).
void window_filter(const double* src, int h, int w, std::vector<double>& out) {
    const auto& win = ssim_window();
    std::vector<double> tmp(static_cast<std::size_t>(h) * (w - 10));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 10 < w; ++x) {
            double acc = 0.0;
            for (int t = 0; t < 11; ++t) acc += win[t] * src[static_cast<std::size_t>(y) * w + x + t];
            tmp[static_cast<std::size_t>(y) * (w - 10) + x] = acc;
        }
    out.assign(static_cast<std::size_t>(h - 10) * (w - 10), 0.0);
    for (int y = 0; y + 10 < h; ++y)
        for (int x = 0; x < w - 10; ++x) {
            double acc = 0.0;
            for (int t = 0; t < 11; ++t)
                acc += win[t] * tmp[(static_cast<std::size_t>(y) + t) * (w - 10) + x];
            out[static_cast<std::size_t>(y) * (w - 10) + x] = acc;
        }
}

double ssim_plane(const double* a, const double* b, int h, int w) {
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const std::size_t n = static_cast<std::size_t>(h) * w;
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    std::vector<double> mu_a, mu_b, m_aa, m_bb, m_ab;
    window_filter(a, h, w, mu_a);
    window_filter(b, h, w, mu_b);
    window_filter(aa.data(), h, w, m_aa);
    window_filter(bb.data(), h, w, m_bb);
    window_filter(ab.data(), h, w, m_ab);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
               ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return acc / static_cast<double>(mu_a.size());
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ValidationError("ssim: image shapes differ");
    if (a.height < 11 || a.width < 11) throw ValidationError("ssim: image smaller than the window");
    double acc = 0.0;
    for (int c = 0; c < a.channels; ++c)
        acc += ssim_plane(a.plane(c).data(), b.plane(c).data(), a.height, a.width);
    return acc / a.channels;
}

RegistrationResult registered_psnr_ssim(const Image& restored, const Image& gt, int max_shift) {
    if (!restored.same_shape(gt)) throw ValidationError("registration: image shapes differ");
    if (max_shift < 0) throw ValidationError("registration: max shift must be >= 0");
    const int h = gt.height, w = gt.width, ch = gt.channels;
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    // Candidate shifts ordered small-to-large so ties resolve to the
    // smallest translation (and (0,0) is always evaluated).
    std::vector<std::pair<int, int>> shifts;
    for (int dy = -max_shift; dy <= max_shift; ++dy)
        for (int dx = -max_shift; dx <= max_shift; ++dx) shifts.emplace_back(dy, dx);
    std::stable_sort(shifts.begin(), shifts.end(), [](auto a, auto b) {
        return std::abs(a.first) + std::abs(a.second) < std::abs(b.first) + std::abs(b.second);
    });

    RegistrationResult best;
    best.psnr = -std::numeric_limits<double>::infinity();
    for (auto [dy, dx] : shifts) {
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        if (y0 >= y1 || x0 >= x1) continue;
        double rg = 0.0, rr = 0.0;
        for (int c = 0; c < ch; ++c) {
            const auto g = gt.plane(c);
            const auto r = restored.plane(c);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    const double rv = r[static_cast<std::size_t>(y + dy) * w + (x + dx)];
                    rg += rv * g[static_cast<std::size_t>(y) * w + x];
                    rr += rv * rv;
                }
        }
        const double scale = rr > 0.0 ? rg / rr : 1.0;
        double mse = 0.0;
        std::size_t n = 0;
        for (int c = 0; c < ch; ++c) {
            const auto g = gt.plane(c);
            const auto r = restored.plane(c);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    const double d = scale * r[static_cast<std::size_t>(y + dy) * w + (x + dx)] -
                                     g[static_cast<std::size_t>(y) * w + x];
                    mse += d * d;
                    ++n;
                }
        }
        mse /= static_cast<double>(n);
        const double p = mse == 0.0 ? std::numeric_limits<double>::infinity()
                                    : 10.0 * std::log10(1.0 / mse);
        if (p > best.psnr) {
            best.psnr = p;
            best.dx = dx;
            best.dy = dy;
            best.scale = scale;
        }
        if (std::isinf(best.psnr)) break;  // cannot improve on an exact match
    }

    // SSIM at the winning shift on the overlap, scale applied.
    {
        const int dy = best.dy, dx = best.dx;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        const int oh = y1 - y0, ow = x1 - x0;
        Image cg(oh, ow, ch), cr(oh, ow, ch);
        for (int c = 0; c < ch; ++c) {
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) {
                    cg.at(y, x, c) = gt.data[c * plane + static_cast<std::size_t>(y + y0) * w + (x + x0)];
                    cr.at(y, x, c) = best.scale *
                        restored.data[c * plane + static_cast<std::size_t>(y + y0 + dy) * w + (x + x0 + dx)];
                }
        }
        best.ssim = ssim(cr, cg);
    }
    return best;
}

namespace {

// 1D averaging filter of length `size` along x (axis = 0) or y (axis = 1),
// replicate boundary.
std::vector<double> box_filter_axis(const std::vector<double>& src, int h, int w, int size, int axis) {
    std::vector<double> out(src.size());
    const int half = size / 2;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -half; t <= half; ++t) {
                int sy = y, sx = x;
                if (axis == 0)
                    sx = std::clamp(x + t, 0, w - 1);
                else
                    sy = std::clamp(y + t, 0, h - 1);
                acc += src[static_cast<std::size_t>(sy) * w + sx];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc / size;
        }
    }
    return out;
}

// Sum of destroyed variation vs original variation along one axis.
void axis_variation(const std::vector<double>& orig, const std::vector<double>& blur,
                    int h, int w, int axis, double& sum_orig, double& sum_destroyed) {
    sum_orig = 0.0;
    sum_destroyed = 0.0;
    const int ylim = axis == 1 ? h - 1 : h;
    const int xlim = axis == 0 ? w - 1 : w;
    for (int y = 0; y < ylim; ++y) {
        for (int x = 0; x < xlim; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::size_t j = axis == 0 ? i + 1 : i + w;
            const double d_orig = std::abs(orig[j] - orig[i]);
            const double d_blur = std::abs(blur[j] - blur[i]);
            sum_orig += d_orig;
            sum_destroyed += std::max(0.0, d_orig - d_blur);
        }
    }
}

}  // namespace

double blur_strength(const Image& img, int filter_size) {
    if (filter_size < 3 || filter_size % 2 == 0)
        throw ValidationError("blur_strength: filter size must be odd and >= 3");
    if (img.height < filter_size || img.width < filter_size)
        throw ValidationError("blur_strength: image smaller than the filter");
    const Image gray = to_gray(img);
    const std::vector<double>& g = gray.data;
    bool any_axis = false;
    double worst = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        const auto blurred = box_filter_axis(g, gray.height, gray.width, filter_size, axis);
        double sum_orig, sum_destroyed;
        axis_variation(g, blurred, gray.height, gray.width, axis, sum_orig, sum_destroyed);
        if (sum_orig <= 0.0) continue;  // no variation along this axis
        any_axis = true;
        worst = std::max(worst, 1.0 - sum_destroyed / sum_orig);
    }
    if (!any_axis) return 1.0;  // constant image: nothing left to destroy
    return worst;
}

namespace {

constexpr double kCpbdBeta = 3.6;
constexpr double kJnbProbability = 0.63;
constexpr int kCpbdBlock = 64;
constexpr double kCpbdEdgeThreshold = 16.0;   // raw Sobel response, 0-255 scale
constexpr double kCpbdBlockEdgeRatio = 0.002; // smooth-block cutoff

struct EdgeStats {
    std::size_t total = 0;
    std::size_t below_jnb = 0;
};

// Measures the monotone-run width through (y, x) along the dominant axis and
// the dynamic range across it, then accumulates the blur probability.
void measure_edge(const std::vector<double>& g, int h, int w, int y, int x, bool horizontal,
                  bool rising, EdgeStats& stats) {
    const auto value = [&](int yy, int xx) { return g[static_cast<std::size_t>(yy) * w + xx]; };
    int lo = horizontal ? x : y;
    int hi = lo;
    const int limit = horizontal ? w - 1 : h - 1;
    auto sample = [&](int pos) { return horizontal ? value(y, pos) : value(pos, x); };
    const double sgn = rising ? 1.0 : -1.0;
    while (lo > 0 && sgn * (sample(lo - 1) - sample(lo)) < 0.0) --lo;
    while (hi < limit && sgn * (sample(hi + 1) - sample(hi)) > 0.0) ++hi;
    const int width_px = hi - lo;
    if (width_px <= 0) return;
    const double contrast = std::abs(sample(hi) - sample(lo));
    const double w_jnb = contrast <= 50.0 ? 5.0 : 3.0;
    const double p_blur = 1.0 - std::exp(-std::pow(width_px / w_jnb, kCpbdBeta));
    ++stats.total;
    if (p_blur <= kJnbProbability) ++stats.below_jnb;
}

}  // namespace

CpbdResult cpbd(const Image& img) {
    const Image gray = to_gray(img);
    const int h = gray.height, w = gray.width;
    if (h < 3 || w < 3) throw ValidationError("cpbd: image too small");
    std::vector<double> g(gray.data.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = gray.data[i] * 255.0;

    // Sobel responses, replicate boundary.
    std::vector<double> gx(g.size()), gy(g.size());
    auto at = [&](int y, int x) {
        return g[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            gx[static_cast<std::size_t>(y) * w + x] =
                (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            gy[static_cast<std::size_t>(y) * w + x] =
                (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
        }
    }

    // Edge map: axis-dominant response above threshold, 1D non-maximum
    // suppression along that axis so each profile is counted once.
    std::vector<std::uint8_t> edge(g.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
            if (ax >= ay) {
                if (ax < kCpbdEdgeThreshold) continue;
                const double left = x > 0 ? std::abs(gx[i - 1]) : 0.0;
                const double right = x < w - 1 ? std::abs(gx[i + 1]) : 0.0;
                if (ax >= left && ax >= right) edge[i] = 1;  // horizontal profile
            } else {
                if (ay < kCpbdEdgeThreshold) continue;
                const double up = y > 0 ? std::abs(gy[i - w]) : 0.0;
                const double down = y < h - 1 ? std::abs(gy[i + w]) : 0.0;
                if (ay >= up && ay >= down) edge[i] = 2;  // vertical profile
            }
        }
    }

    EdgeStats stats;
    for (int by = 0; by < h; by += kCpbdBlock) {
        for (int bx = 0; bx < w; bx += kCpbdBlock) {
            const int ey = std::min(h, by + kCpbdBlock), ex = std::min(w, bx + kCpbdBlock);
            std::size_t count = 0;
            for (int y = by; y < ey; ++y)
                for (int x = bx; x < ex; ++x)
                    if (edge[static_cast<std::size_t>(y) * w + x]) ++count;
            const std::size_t block_px = static_cast<std::size_t>(ey - by) * (ex - bx);
            if (count < static_cast<std::size_t>(kCpbdBlockEdgeRatio * block_px) || count == 0)
                continue;  // smooth block
            for (int y = by; y < ey; ++y) {
                for (int x = bx; x < ex; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    if (!edge[i]) continue;
                    const bool horizontal = edge[i] == 1;
                    const bool rising = (horizontal ? gx[i] : gy[i]) > 0.0;
                    measure_edge(g, h, w, y, x, horizontal, rising, stats);
                }
            }
        }
    }
    if (stats.total == 0) return {0.0, true};
    return {static_cast<double>(stats.below_jnb) / static_cast<double>(stats.total), false};
}

double periodic_tv(const Image& gray) {
    if (gray.channels != 1) throw ValidationError("periodic_tv expects a single channel");
    const int h = gray.height, w = gray.width;
    const auto& g = gray.data;
    double tv = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::size_t ix = static_cast<std::size_t>(y) * w + (x + 1 == w ? 0 : x + 1);
            const std::size_t iy = static_cast<std::size_t>(y + 1 == h ? 0 : y + 1) * w + x;
            tv += std::abs(g[ix] - g[i]) + std::abs(g[iy] - g[i]);
        }
    }
    return tv;
}

double log10_gaussian_tail(double t) {
    constexpr double kLn10 = 2.302585092994045684;
    if (t < 30.0) {
        const double phi = 0.5 * std::erfc(t / 1.4142135623730950488);
        return std::log(phi) / kLn10;
    }
    // log Phi(t) ~ -t^2/2 - log t - log sqrt(2 pi) + log(1 - 1/t^2 + 3/t^4)
    const double t2 = t * t;
    const double series = 1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2);
    const double ln_phi = -0.5 * t2 - std::log(t) - 0.91893853320467274178 + std::log(series);
    return ln_phi / kLn10;
}

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Gaussian hazard phi(t) / Phi(t), stable for large t.
double gaussian_hazard(double t) {
    if (t < 30.0) {
        const double phi = 0.5 * std::erfc(t / 1.4142135623730950488);
        const double pdf = std::exp(-0.5 * t * t) / 2.5066282746310005024;
        return pdf / phi;
    }
    const double t2 = t * t;
    return t / (1.0 - 1.0 / t2 + 3.0 / (t2 * t2));
}

struct FftPlans {
    int h, w;
    std::size_t n_complex;
    double* real;
    fftw_complex* spec;
    fftw_plan fwd, bwd;

    FftPlans(int height, int width) : h(height), w(width) {
        n_complex = static_cast<std::size_t>(h) * (w / 2 + 1);
        std::lock_guard<std::mutex> lock(fftw_mutex());
        real = fftw_alloc_real(static_cast<std::size_t>(h) * w);
        spec = fftw_alloc_complex(n_complex);
        fwd = fftw_plan_dft_r2c_2d(h, w, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(h, w, spec, real, FFTW_ESTIMATE);
    }
    ~FftPlans() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

}  // namespace

SharpnessIndexResult sharpness_index(const Image& img, int realizations, std::uint64_t seed) {
    if (realizations < 2) throw ValidationError("sharpness_index needs at least 2 realizations");
    const Image gray = to_gray(img);
    const int h = gray.height, w = gray.width;
    const std::size_t n = static_cast<std::size_t>(h) * w;

    const double tv_u = periodic_tv(gray);

    FftPlans plans(h, w);
    std::vector<double> u_spec(2 * plans.n_complex);
    std::copy(gray.data.begin(), gray.data.end(), plans.real);
    fftw_execute(plans.fwd);
    std::memcpy(u_spec.data(), plans.spec, sizeof(fftw_complex) * plans.n_complex);

    const double noise_std = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> tvs(realizations);
    Image conv(h, w, 1);
    for (int m = 0; m < realizations; ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        for (std::size_t i = 0; i < n; ++i) plans.real[i] = noise_std * rng.normal();
        fftw_execute(plans.fwd);
        for (std::size_t i = 0; i < plans.n_complex; ++i) {
            const double ur = u_spec[2 * i], ui = u_spec[2 * i + 1];
            const double re = plans.spec[i][0] * ur - plans.spec[i][1] * ui;
            const double im = plans.spec[i][0] * ui + plans.spec[i][1] * ur;
            plans.spec[i][0] = re;
            plans.spec[i][1] = im;
        }
        fftw_execute(plans.bwd);
        const double norm = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) conv.data[i] = plans.real[i] * norm;
        tvs[m] = periodic_tv(conv);
    }

    double mu = 0.0;
    for (double v : tvs) mu += v;
    mu /= realizations;
    double var = 0.0;
    for (double v : tvs) var += (v - mu) * (v - mu);
    var /= (realizations - 1);
    const double sigma = std::sqrt(var);

    SharpnessIndexResult out;
    if (!(sigma > 0.0)) {
        out.degenerate = true;
        return out;
    }
    const double t = (mu - tv_u) / sigma;
    out.value = -log10_gaussian_tail(t);
    const double se_t = std::sqrt(1.0 / realizations + t * t / (2.0 * (realizations - 1)));
    out.std_error = gaussian_hazard(t) / 2.302585092994045684 * se_t;
    return out;
}

}  // namespace varblur
