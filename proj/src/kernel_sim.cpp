#include "fbmp/kernel_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fbmp/ops.hpp"

namespace fbmp {

namespace {

// Gaussian CDF with standard deviation sigma.
double gauss_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

}  // namespace

Kernel2D synth_kernel(const SyntheticKernelSpec& spec) {
    if (spec.sigma <= 0.0) throw ParamError("synth_kernel: sigma must be positive");
    if (spec.d < 0.0) throw ParamError("synth_kernel: motion width must be non-negative");
    if (spec.radius < 1) throw ParamError("synth_kernel: radius must be >= 1");
    if (std::abs(spec.cx) >= spec.radius || std::abs(spec.cy) >= spec.radius)
        throw ParamError("synth_kernel: peak offset must lie strictly inside the kernel radius");

    const int R = spec.radius;
    const int n = 2 * R + 1;
    const double theta = spec.theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double sigma = spec.sigma;
    const double two_pi = 2.0 * std::numbers::pi;
    const bool pure_gaussian = spec.d < 1e-8;

    Kernel2D k(n);
    for (int i = -R; i <= R; ++i) {      // i: vertical (y)
        for (int j = -R; j <= R; ++j) {  // j: horizontal (x)
            const double xs = j - spec.cx;
            const double ys = i - spec.cy;
            const double x = xs * ct + ys * st;
            const double y = -xs * st + ys * ct;
            double v;
            if (pure_gaussian) {
                v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (two_pi * sigma * sigma);
            } else {
                const double box = gauss_cdf(x + 0.5 * spec.d, sigma) - gauss_cdf(x - 0.5 * spec.d, sigma);
                v = box * std::exp(-y * y / (2.0 * sigma * sigma)) /
                    (std::sqrt(two_pi) * spec.d * sigma);
            }
            k(i + R, j + R) = v;
        }
    }
    k.normalize();
    return k;
}

Plane simulate_lrms_plane(const Plane& hr, const Kernel2D& k, int factor,
                          std::optional<double> noise_psnr_db, std::uint64_t seed, double peak) {
    Plane lr = downsample(circular_convolve(hr, k), factor);
    if (!noise_psnr_db) return lr;

    const double target_mse = peak * peak * std::pow(10.0, -*noise_psnr_db / 10.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(lr.size());
    double ss = 0.0;
    for (double& v : noise) {
        v = gauss(rng);
        ss += v * v;
    }
    if (ss <= 0.0) throw NumericalError("simulate_lrms: degenerate noise draw");
    // scale the draw so the realized MSE hits the target exactly
    const double scale = std::sqrt(target_mse * static_cast<double>(lr.size()) / ss);
    for (std::size_t i = 0; i < lr.size(); ++i) lr.data()[i] += scale * noise[i];
    return lr;
}

MultiBandImage simulate_lrms(const MultiBandImage& hrms, const Kernel2D& k, int factor,
                             std::optional<double> noise_psnr_db, std::uint64_t seed, double peak) {
    std::vector<Plane> bands;
    bands.reserve(hrms.band_count());
    for (int i = 0; i < hrms.band_count(); ++i)
        bands.push_back(simulate_lrms_plane(hrms.band(i), k, factor, noise_psnr_db,
                                            seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1),
                                            peak));
    return MultiBandImage(std::move(bands));
}

}  // namespace fbmp
