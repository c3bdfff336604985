#include "fbmp/spectral_weights.hpp"

#include <Eigen/Dense>

#include "fbmp/ops.hpp"

namespace fbmp {

SpectralWeights solve_weights(const MultiBandImage& lrms_subset, const Plane& pan,
                              const SpectralWeightConfig& cfg) {
    const int c = cfg.factor;
    if (c < 1) throw ParamError("solve_weights: factor must be >= 1");
    if (cfg.l < 1) throw ParamError("solve_weights: l must be >= 1");
    if (cfg.lambda_omega < 0.0) throw ParamError("solve_weights: lambda_omega must be >= 0");
    if (pan.height() != c * lrms_subset.height() || pan.width() != c * lrms_subset.width())
        throw DimensionError("solve_weights: PAN dimensions must be factor times the LRMS dimensions");

    const int nb = lrms_subset.band_count();
    const Eigen::Index m = static_cast<Eigen::Index>(lrms_subset.height()) * lrms_subset.width();

    Eigen::MatrixXd A(m, nb);
    for (int i = 0; i < nb; ++i) {
        Plane blurred = circular_box_blur(lrms_subset.band(i), cfg.l + 1);
        A.col(i) = Eigen::Map<const Eigen::VectorXd>(blurred.data(), m);
    }
    Plane degraded_pan = downsample(circular_box_blur(pan, c * cfg.l + 1), c);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(degraded_pan.data(), m);

    Eigen::MatrixXd normal = A.transpose() * A;
    if (nb > 1) {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb - 1, nb);
        for (int i = 0; i < nb - 1; ++i) {
            G(i, i) = -1.0;
            G(i, i + 1) = 1.0;
        }
        normal += cfg.lambda_omega * G.transpose() * G;
    }
    Eigen::VectorXd rhs = A.transpose() * b;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (lu.rank() < nb)
        throw NumericalError("solve_weights: normal matrix is singular (bands linearly dependent "
                             "and lambda_omega too small)");
    Eigen::VectorXd omega = lu.solve(rhs);

    const double resid = (normal * omega - rhs).norm();
    if (!(resid <= 1e-8 * rhs.norm() + 1e-12))
        throw NumericalError("solve_weights: stationarity residual too large (ill-conditioned system)");

    SpectralWeights w;
    w.omega.assign(omega.data(), omega.data() + nb);
    return w;
}

Plane combine_bands(const MultiBandImage& lrms_subset, const SpectralWeights& w) {
    if (static_cast<int>(w.omega.size()) != lrms_subset.band_count())
        throw DimensionError("combine_bands: weight count does not match band count");
    Plane out(lrms_subset.height(), lrms_subset.width());
    for (int i = 0; i < lrms_subset.band_count(); ++i) {
        const Plane& b = lrms_subset.band(i);
        for (std::size_t j = 0; j < out.size(); ++j)
            out.data()[j] += w.omega[i] * b.data()[j];
    }
    return out;
}

}  // namespace fbmp
