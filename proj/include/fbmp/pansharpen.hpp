#pragma once

#include <Eigen/Sparse>

#include "fbmp/image.hpp"

namespace fbmp {

// Operator extracting the component of the image that the cross-channel
// prior couples: the Laplacian for the default prior, the identity for the
// pixel-domain ablation, or an arbitrary kernel (e.g. the blur kernel for
// the low-pass ablation, delta minus the blur kernel for the high-pass one).
enum class PriorKind { laplacian, identity, custom };

struct PansharpenParams {
    double lambda = 2e-4;  // prior weight
    int radius = 1;        // window radius of the local affine model
    double eps = 1e-4;     // affine-fit regularizer
    double cg_tol = 5e-5;  // warmstart stop threshold (relative iterate change)
    int cg_max_iter = 2000;
    PriorKind prior = PriorKind::laplacian;
    Kernel2D prior_kernel;  // used when prior == custom
    int threads = 0;        // channel workers; 0 = hardware default

    void validate() const;
};

Plane apply_prior(const Plane& img, const PansharpenParams& params);
Plane apply_prior_adjoint(const Plane& img, const PansharpenParams& params);

// Sparse symmetric matrix whose quadratic form equals the minimal affine-fit
// loss over all (2r+1)^2 windows fully contained in the guide.
class MattingMatrix {
public:
    MattingMatrix() = default;

    static MattingMatrix build(const Plane& guide, int radius, double eps);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    Eigen::Index dimension() const noexcept { return matrix_.rows(); }
    int radius() const noexcept { return radius_; }
    double eps() const noexcept { return eps_; }

    const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const noexcept { return matrix_; }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return matrix_ * v; }
    Plane apply(const Plane& p) const;

    const Plane& window_mean() const noexcept { return window_mean_; }
    const Plane& window_var() const noexcept { return window_var_; }

private:
    int height_ = 0;
    int width_ = 0;
    int radius_ = 0;
    double eps_ = 0.0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
    Plane window_mean_;
    Plane window_var_;
};

MattingMatrix build_matting_matrix(const Plane& guide, int radius, double eps);

// Conjugate-gradient solve of
//   (B^T D^T D B + lambda L^T M L) Z = B^T D^T x_i
// with all operators applied matrix-free. Stops when the relative change of
// the iterate drops below params.cg_tol.
Plane warmstart_channel(const Plane& x_i, const Plane& pan, const Kernel2D& k, int factor,
                        const MattingMatrix& M, const PansharpenParams& params);

// Same solve with an explicit iteration budget; used by the convergence
// experiments. Reports the final normal-equation residual if requested.
Plane warmstart_cg(const Plane& x_i, const Kernel2D& k, int factor, const MattingMatrix& M,
                   const PansharpenParams& params, int max_iters, bool error_on_cap,
                   double* final_residual = nullptr);

struct AffineCoeffMaps {
    Plane a;  // per-window slope
    Plane c;  // per-window intercept
    Plane guide_mean, guide_var, input_mean;
};

AffineCoeffMaps guided_coeffs(const Plane& input, const Plane& guide, int radius, double eps);
Plane guided_output(const AffineCoeffMaps& coeffs, const Plane& guide, int radius);

// Exact minimizer of 0.5*||D B Z - x_i||^2 + (lambda/2)*||L Z - v||^2 via the
// alias-group direct method: decimation couples each group of c^2 frequencies
// folding onto one low-resolution frequency, and every group's normal
// equations form a (diagonal + rank-one) Hermitian block solved densely.
Plane solve_channel_fft(const Plane& x_i, const Kernel2D& k, int factor, const Plane& v,
                        const PansharpenParams& params);

// Full per-channel pipeline: warmstart, one guided-filter refit of the prior
// component, one direct frequency-domain solve. Channels run in parallel.
MultiBandImage pansharpen(const MultiBandImage& lrms, const Plane& pan, const Kernel2D& k,
                          int factor, const PansharpenParams& params);

}  // namespace fbmp
