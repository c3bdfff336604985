#pragma once

#include <cstdint>
#include <optional>

#include "fbmp/image.hpp"

namespace fbmp {

// Ground-truth kernel model: an isotropic Gaussian (std sigma, peak shifted
// to (cx, cy) in pixels) convolved with a d-pixel-wide motion blur rotated
// by theta degrees, sampled on a (2R+1)^2 tap grid and normalized to unit
// sum. d = 0 degenerates to the pure Gaussian.
struct SyntheticKernelSpec {
    double sigma = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double d = 0.0;
    double theta_deg = 0.0;
    int radius = 4;
};

Kernel2D synth_kernel(const SyntheticKernelSpec& spec);

// Degrades an HRMS image into an LRMS observation: circular convolution with
// k, decimation by `factor`, and optional white Gaussian noise. The noise is
// scaled so the PSNR of the noisy vs clean degraded band (peak = `peak`)
// matches `noise_psnr_db` exactly; `seed` makes the draw reproducible.
MultiBandImage simulate_lrms(const MultiBandImage& hrms, const Kernel2D& k, int factor,
                             std::optional<double> noise_psnr_db = std::nullopt,
                             std::uint64_t seed = 0, double peak = 1.0);

Plane simulate_lrms_plane(const Plane& hr, const Kernel2D& k, int factor,
                          std::optional<double> noise_psnr_db = std::nullopt,
                          std::uint64_t seed = 0, double peak = 1.0);

}  // namespace fbmp
