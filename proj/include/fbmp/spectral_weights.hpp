#pragma once

#include <vector>

#include "fbmp/image.hpp"

namespace fbmp {

struct SpectralWeightConfig {
    std::vector<int> band_indices;  // LRMS bands overlapping the PAN spectrum
    int l = 4;                      // box half-extent: LR window (l+1), HR window (c*l+1)
    double lambda_omega = 10.0;
    int factor = 2;
};

struct SpectralWeights {
    std::vector<double> omega;
};

// Least-squares weights mapping the (box-blurred) LRMS bands to the blurred
// and decimated PAN image, with a first-difference penalty tying the weights
// of neighboring bands together. `lrms_subset` already holds only the
// overlapping bands.
SpectralWeights solve_weights(const MultiBandImage& lrms_subset, const Plane& pan,
                              const SpectralWeightConfig& cfg);

// Linear combination of the subset bands with the solved weights; this is
// the observation X'w fed to the kernel estimator.
Plane combine_bands(const MultiBandImage& lrms_subset, const SpectralWeights& w);

}  // namespace fbmp
