#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbmp/image.hpp"

namespace fbmp {

struct MetricsReport {
    std::vector<double> psnr_per_band;
    double psnr_avg = 0.0;
    double psnr_reg_avg = 0.0;
    std::optional<double> ergas;
    std::optional<double> sam_deg;
    std::optional<double> rase;
    std::optional<double> ssim_avg;
    std::optional<double> kernel_rel_error_pct;

    // flat key-value block (formulas included for auditability) and CSV
    std::string to_text() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

MultiBandImage crop_border(const MultiBandImage& img, int margin);
Plane crop_border(const Plane& img, int margin);

// Per-band 20*log10(255/sqrt(MSE)) and their mean; inputs are expected on
// the [0,255] scale. Identical bands report +infinity.
std::pair<std::vector<double>, double> psnr_avg(const MultiBandImage& est,
                                                const MultiBandImage& ref);
double psnr_plane(const Plane& est, const Plane& ref);

// Best-affine-fit PSNR: per band, a and b minimizing ||a*est + b - ref||^2
// in closed form, then the PSNR of the fitted band; averaged over bands.
double psnr_reg_avg(const MultiBandImage& est, const MultiBandImage& ref);

double ergas(const MultiBandImage& est, const MultiBandImage& ref, int factor);
double sam_deg(const MultiBandImage& est, const MultiBandImage& ref);
double rase(const MultiBandImage& est, const MultiBandImage& ref);

// Mean over bands of single-scale SSIM against the PAN image (11x11 Gaussian
// window, sigma 1.5, K1=0.01, K2=0.03, dynamic range 255).
double ssim_avg(const MultiBandImage& est, const Plane& pan);
double ssim_plane(const Plane& a, const Plane& b);

// 100*||U - Uhat||_F / ||U||_F; the smaller kernel is zero-padded and
// center-aligned first.
double kernel_rel_error_pct(const Kernel2D& est, const Kernel2D& truth);

}  // namespace fbmp
