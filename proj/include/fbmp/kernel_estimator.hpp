#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fbmp/image.hpp"
#include "fbmp/spectral_weights.hpp"

namespace fbmp {

enum class KernelInit { dirac, uniform };

struct KernelEstParams {
    int n = 29;             // kernel side, odd
    double alpha1 = 1.0;    // weight of ||grad u - p||_{2,1}
    double alpha2 = 0.006;  // weight of ||E(p)||_{2,1}
    double mu1 = 100.0;
    double mu2 = 100.0;
    double mu3 = 100.0;
    double rho = 0.5;       // multiplier step, 0 < rho < (1+sqrt(5))/2
    int t_max = 10000;
    double th = 1e-5;       // relative-change stop threshold on u
    KernelInit init = KernelInit::dirac;  // the problem is convex; this only affects speed

    void validate() const;
};

// Linear observation model f ~ E u: each row of E holds the circular PAN
// patch multiplied by the kernel taps when producing one low-resolution
// pixel. E^T E + mu3 I is factored once at construction.
class ObservationSystem {
public:
    ObservationSystem(const Plane& pan, const Plane& observation, int factor, int n, double mu3);

    const Eigen::MatrixXd& E() const noexcept { return E_; }
    const Eigen::VectorXd& f() const noexcept { return f_; }
    int kernel_size() const noexcept { return n_; }
    double mu3() const noexcept { return mu3_; }

    // (E^T E + mu3 I)^{-1} (E^T f + mu3 * anchor)
    Eigen::VectorXd solve_z(const Eigen::VectorXd& anchor) const;

    double data_objective(const Eigen::VectorXd& u) const;  // 0.5*||Eu - f||^2

private:
    int n_;
    double mu3_;
    Eigen::MatrixXd E_;
    Eigen::VectorXd f_;
    Eigen::VectorXd Etf_;
    Eigen::MatrixXd EtE_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
};

ObservationSystem build_observation(const Plane& pan, const Plane& observation, int factor,
                                    int n, double mu3);

// Row-wise soft threshold: each pixel's tuple across `columns` is a row e,
// mapped to max(||e||_2 - t, 0) * e/||e||_2.
std::vector<Plane> shrink2(std::span<const Plane> columns, double t);

// Euclidean projection onto {s >= 0, sum s = 1} (sort-and-threshold).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Closed-form solve of the {u,p} subproblem: the 3x3 block system with
// circulant blocks, diagonalized by the 2-D DFT and solved per frequency by
// Cramer's rule. The system annihilates constant u (gradient blocks), so the
// zero frequency is solved in the minimum-norm least-squares sense; the ADMM
// driver re-anchors u's mean afterwards.
struct UpSolution {
    Plane u, p1, p2;
};
UpSolution solve_up(const std::array<Plane, 2>& x, const std::array<Plane, 4>& y,
                    const std::array<Plane, 2>& L1, const std::array<Plane, 4>& L2,
                    const KernelEstParams& params);

// ADMM iterates for the TGV^2 + simplex kernel estimation. y and L2 keep the
// symmetric cross term in both middle columns, matching the 4-column
// definition of E(p).
struct TgvAdmmState {
    Plane u, p1, p2;
    std::array<Plane, 2> x;
    std::array<Plane, 4> y;
    Plane z;
    std::array<Plane, 2> L1;
    std::array<Plane, 4> L2;
    Plane L3;
    int iterations = 0;
};

using TgvIterHook = std::function<void(const TgvAdmmState&, int)>;

enum class KernelPrior { tgv2, tv, l2 };

// Internal intensity normalization applied jointly to the PAN image and the
// observation before estimation: [0,1] range plus a sqrt(16384/hw) residual
// reweighting that keeps the data-vs-regularizer balance independent of the
// scene size the defaults were tuned at.
double estimation_intensity_scale(const Plane& pan, int factor);

// Shared low-level entry: estimates the kernel directly from a PAN plane and
// the observation plane it should degrade to (used by the regularizer bench,
// where the observation is the degraded PAN itself).
Kernel2D estimate_kernel_plane(KernelPrior prior, const Plane& pan, const Plane& observation,
                               int factor, const KernelEstParams& params,
                               TgvAdmmState* final_state = nullptr,
                               const TgvIterHook& before_up_solve = {});

Kernel2D estimate_kernel_tgv(const MultiBandImage& lrms_subset, const Plane& pan,
                             const SpectralWeights& omega, int factor,
                             const KernelEstParams& params,
                             TgvAdmmState* final_state = nullptr,
                             const TgvIterHook& before_up_solve = {});

Kernel2D estimate_kernel_tv(const MultiBandImage& lrms_subset, const Plane& pan,
                            const SpectralWeights& omega, int factor,
                            const KernelEstParams& params);

Kernel2D estimate_kernel_l2(const MultiBandImage& lrms_subset, const Plane& pan,
                            const SpectralWeights& omega, int factor,
                            const KernelEstParams& params);

// Value of the estimation objective
//   0.5*||Eu-f||^2 + alpha1*||grad u - p||_{2,1} + alpha2*||E(p)||_{2,1}
// used to verify that the convex problem converges to the same value from
// different initializations.
double tgv_objective(const ObservationSystem& obs, const Plane& u, const Plane& p1,
                     const Plane& p2, const KernelEstParams& params);

}  // namespace fbmp
