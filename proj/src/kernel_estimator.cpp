#include "fbmp/kernel_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <Eigen/QR>

#include "fbmp/ops.hpp"
#include "fft_util.hpp"

namespace fbmp {

namespace {

using cd = std::complex<double>;

Eigen::Map<const Eigen::VectorXd> as_vec(const Plane& p) {
    return {p.data(), static_cast<Eigen::Index>(p.size())};
}

Plane as_plane(const Eigen::VectorXd& v, int rows, int cols) {
    return Plane(rows, cols, std::vector<double>(v.data(), v.data() + v.size()));
}

void check_finite(const Plane& p, const char* what, int iter) {
    if (!p.all_finite())
        throw NumericalError(std::string("kernel estimation diverged: non-finite ") + what +
                             " at iteration " + std::to_string(iter));
}

}  // namespace

void KernelEstParams::validate() const {
    if (n < 1 || n % 2 == 0) throw ParamError("kernel estimation: n must be odd and positive");
    if (alpha1 <= 0 || alpha2 <= 0) throw ParamError("kernel estimation: alpha weights must be positive");
    if (mu1 <= 0 || mu2 <= 0 || mu3 <= 0) throw ParamError("kernel estimation: mu penalties must be positive");
    const double rho_max = (1.0 + std::sqrt(5.0)) / 2.0;
    if (!(rho > 0 && rho < rho_max))
        throw ParamError("kernel estimation: rho must lie in (0, (1+sqrt(5))/2)");
    if (!(th > 0)) throw ParamError("kernel estimation: th must be positive");
    if (t_max < 1) throw ParamError("kernel estimation: t_max must be >= 1");
}

ObservationSystem::ObservationSystem(const Plane& pan, const Plane& observation, int factor,
                                     int n, double mu3)
    : n_(n), mu3_(mu3) {
    if (n < 1 || n % 2 == 0) throw ParamError("build_observation: kernel side must be odd");
    if (factor < 1) throw ParamError("build_observation: factor must be >= 1");
    if (pan.height() != factor * observation.height() || pan.width() != factor * observation.width())
        throw DimensionError("build_observation: PAN dimensions must be factor times the observation");
    if (n > std::min(pan.height(), pan.width()))
        throw DimensionError("build_observation: kernel larger than PAN image");

    const int h = observation.height(), w = observation.width();
    const int C = (n - 1) / 2;
    E_.resize(static_cast<Eigen::Index>(h) * w, static_cast<Eigen::Index>(n) * n);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * w + j;
            for (int tr = 0; tr < n; ++tr)
                for (int tc = 0; tc < n; ++tc)
                    E_(row, static_cast<Eigen::Index>(tr) * n + tc) =
                        pan.at_wrap(factor * i - (tr - C), factor * j - (tc - C));
        }
    }
    f_ = as_vec(observation);
    Etf_ = E_.transpose() * f_;
    EtE_ = E_.transpose() * E_;
    Eigen::MatrixXd reg = EtE_;
    reg.diagonal().array() += mu3;
    factor_.compute(reg);
    if (factor_.info() != Eigen::Success)
        throw NumericalError("build_observation: factorization of E^T E + mu3 I failed");
}

Eigen::VectorXd ObservationSystem::solve_z(const Eigen::VectorXd& anchor) const {
    if (anchor.size() != Etf_.size())
        throw DimensionError("solve_z: anchor length does not match kernel size");
    return factor_.solve(Etf_ + mu3_ * anchor);
}

double ObservationSystem::data_objective(const Eigen::VectorXd& u) const {
    return 0.5 * (E_ * u - f_).squaredNorm();
}

ObservationSystem build_observation(const Plane& pan, const Plane& observation, int factor,
                                    int n, double mu3) {
    return ObservationSystem(pan, observation, factor, n, mu3);
}

std::vector<Plane> shrink2(std::span<const Plane> columns, double t) {
    if (t < 0) throw ParamError("shrink2: threshold must be non-negative");
    if (columns.empty()) return {};
    for (const Plane& c : columns)
        if (!c.same_shape(columns.front())) throw DimensionError("shrink2: column shape mismatch");

    std::vector<Plane> out(columns.begin(), columns.end());
    const std::size_t m = columns.front().size();
    for (std::size_t i = 0; i < m; ++i) {
        double norm2 = 0.0;
        for (const Plane& c : columns) norm2 += c.data()[i] * c.data()[i];
        const double norm = std::sqrt(norm2);
        const double scale = norm > t ? (norm - t) / norm : 0.0;
        for (Plane& c : out) c.data()[i] *= scale;
    }
    return out;
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, tau = 0.0;
    int support = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        css += u[j];
        const double cand = (1.0 - css) / static_cast<double>(j + 1);
        if (u[j] + cand > 0.0) {
            tau = cand;
            support = static_cast<int>(j + 1);
        }
    }
    if (support == 0) throw NumericalError("project_simplex: empty support (non-finite input?)");
    return (v.array() + tau).max(0.0).matrix();
}

namespace {

// Shared core of the {u,p} frequency-domain solve. `coupling` adds the
// mu3-weighted proximal tie of u to `anchor` (z - L3): the block update of
// the full augmented Lagrangian. With coupling = 0 this is the plain
// stationarity system of the TGV penalty terms, which is rank-deficient in
// u's mean at the zero frequency and solved there in the minimum-norm sense.
UpSolution solve_up_core(const std::array<Plane, 2>& x, const std::array<Plane, 4>& y,
                         const std::array<Plane, 2>& L1, const std::array<Plane, 4>& L2,
                         const KernelEstParams& params, double coupling, const Plane* anchor) {
    const Plane& ref = x[0];
    const int rows = ref.height(), cols = ref.width();
    for (const Plane* p : {&x[1], &y[0], &y[1], &y[2], &y[3], &L1[0], &L1[1],
                           &L2[0], &L2[1], &L2[2], &L2[3]})
        if (!p->same_shape(ref)) throw DimensionError("solve_up: field shape mismatch");

    const double a1m1 = params.alpha1 * params.mu1;
    const double a2m2 = params.alpha2 * params.mu2;

    // Right-hand sides of the stationarity system. The cross column of y/L2
    // is stored twice; use the average so unequal inputs stay well-defined.
    Plane x1mL = x[0] - L1[0];
    Plane x2mL = x[1] - L1[1];
    Plane y1mL = y[0] - L2[0];
    Plane y2mL = y[3] - L2[3];
    Plane ycmL = (y[1] - L2[1] + y[2] - L2[2]) * 0.5;

    Plane B1 = (diff_adjoint(x1mL, DiffOp::grad_h) + diff_adjoint(x2mL, DiffOp::grad_v)) * a1m1;
    Plane B2 = (x1mL * -a1m1) +
               (diff_adjoint(y1mL, DiffOp::grad_h) + diff_adjoint(ycmL, DiffOp::grad_v)) * a2m2;
    Plane B3 = (x2mL * -a1m1) +
               (diff_adjoint(y2mL, DiffOp::grad_v) + diff_adjoint(ycmL, DiffOp::grad_h)) * a2m2;
    if (coupling > 0.0 && anchor) B1 += *anchor * coupling;

    detail::Fft2D fft(rows, cols);
    std::vector<cd> FB1 = fft.forward(B1);
    std::vector<cd> FB2 = fft.forward(B2);
    std::vector<cd> FB3 = fft.forward(B3);

    const std::size_t m = fft.size();
    std::vector<cd> FU(m), FP1(m), FP2(m);
    std::vector<cd> d4(m), d5(m), d6(m), denom(m);
    std::vector<double> d1(m), d2(m), d3(m);

    double max_denom = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double wv = 2.0 * std::numbers::pi * r / rows;
        const cd dv = cd(std::cos(wv), std::sin(wv)) - 1.0;
        const double av2 = std::norm(dv);
        for (int c = 0; c < cols; ++c) {
            const double wh = 2.0 * std::numbers::pi * c / cols;
            const cd dh = cd(std::cos(wh), std::sin(wh)) - 1.0;
            const double ah2 = std::norm(dh);
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            d1[i] = a1m1 * (ah2 + av2) + coupling;
            d2[i] = a1m1 + 0.5 * a2m2 * av2 + a2m2 * ah2;
            d3[i] = a1m1 + 0.5 * a2m2 * ah2 + a2m2 * av2;
            d4[i] = -a1m1 * dh;
            d5[i] = -a1m1 * dv;
            d6[i] = 0.5 * a2m2 * std::conj(dh) * dv;
            denom[i] = d1[i] * (d2[i] * d3[i] - std::norm(d6[i])) -
                       std::conj(d4[i]) * (d4[i] * d3[i] - std::conj(d6[i]) * d5[i]) +
                       std::conj(d5[i]) * (d4[i] * d6[i] - cd(d2[i]) * d5[i]);
            max_denom = std::max(max_denom, std::abs(denom[i]));
        }
    }

    const double singular_tol = 1e-12 * max_denom;
    for (std::size_t i = 0; i < m; ++i) {
        const cd b1 = FB1[i], b2 = FB2[i], b3 = FB3[i];
        if (std::abs(denom[i]) > singular_tol) {
            const cd nu = b1 * (d2[i] * d3[i] - std::norm(d6[i])) -
                          std::conj(d4[i]) * (b2 * d3[i] - std::conj(d6[i]) * b3) +
                          std::conj(d5[i]) * (b2 * d6[i] - cd(d2[i]) * b3);
            const cd np1 = cd(d1[i]) * (b2 * d3[i] - std::conj(d6[i]) * b3) -
                           b1 * (d4[i] * d3[i] - std::conj(d6[i]) * d5[i]) +
                           std::conj(d5[i]) * (d4[i] * b3 - b2 * d5[i]);
            const cd np2 = cd(d1[i]) * (cd(d2[i]) * b3 - d6[i] * b2) -
                           std::conj(d4[i]) * (d4[i] * b3 - b2 * d5[i]) +
                           b1 * (d4[i] * d6[i] - cd(d2[i]) * d5[i]);
            FU[i] = nu / denom[i];
            FP1[i] = np1 / denom[i];
            FP2[i] = np2 / denom[i];
        } else {
            // rank-deficient frequency (the DC bin): minimum-norm least squares
            Eigen::Matrix3cd A;
            A << cd(d1[i]), std::conj(d4[i]), std::conj(d5[i]),
                 d4[i],     cd(d2[i]),        std::conj(d6[i]),
                 d5[i],     d6[i],            cd(d3[i]);
            Eigen::Vector3cd rhs(b1, b2, b3);
            Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3cd> cod(A);
            Eigen::Vector3cd sol = cod.solve(rhs);
            FU[i] = sol(0);
            FP1[i] = sol(1);
            FP2[i] = sol(2);
        }
    }

    UpSolution out;
    out.u = fft.backward_real(FU.data());
    out.p1 = fft.backward_real(FP1.data());
    out.p2 = fft.backward_real(FP2.data());
    return out;
}

}  // namespace

UpSolution solve_up(const std::array<Plane, 2>& x, const std::array<Plane, 4>& y,
                    const std::array<Plane, 2>& L1, const std::array<Plane, 4>& L2,
                    const KernelEstParams& params) {
    return solve_up_core(x, y, L1, L2, params, 0.0, nullptr);
}

double tgv_objective(const ObservationSystem& obs, const Plane& u, const Plane& p1,
                     const Plane& p2, const KernelEstParams& params) {
    const double data = obs.data_objective(as_vec(u));
    Plane gx = diff_operator(u, DiffOp::grad_h) - p1;
    Plane gy = diff_operator(u, DiffOp::grad_v) - p2;
    double tgv1 = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i)
        tgv1 += std::hypot(gx.data()[i], gy.data()[i]);
    Plane e1 = diff_operator(p1, DiffOp::grad_h);
    Plane e4 = diff_operator(p2, DiffOp::grad_v);
    Plane ec = (diff_operator(p1, DiffOp::grad_v) + diff_operator(p2, DiffOp::grad_h)) * 0.5;
    double tgv2 = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        const double c = ec.data()[i];
        tgv2 += std::sqrt(e1.data()[i] * e1.data()[i] + e4.data()[i] * e4.data()[i] + 2.0 * c * c);
    }
    return data + params.alpha1 * tgv1 + params.alpha2 * tgv2;
}

namespace {

std::array<Plane, 4> symmetrized_gradient(const Plane& p1, const Plane& p2) {
    Plane cross = (diff_operator(p1, DiffOp::grad_v) + diff_operator(p2, DiffOp::grad_h)) * 0.5;
    return {diff_operator(p1, DiffOp::grad_h), cross, cross, diff_operator(p2, DiffOp::grad_v)};
}

void check_degenerate(const Plane& pan) {
    const double mean = pan.mean();
    double dev = 0.0;
    for (double v : pan.samples()) dev = std::max(dev, std::abs(v - mean));
    if (dev <= 1e-12 * std::max(1.0, std::abs(mean)))
        throw NumericalError("kernel estimation: constant PAN image is unidentifiable "
                             "(E^T E has rank 1)");
}

// The regularizer weights assume [0,1]-like intensities on a low-resolution
// grid of ~16k pixels (the scale the published defaults were tuned at). The
// data term sums over hw pixels while the TGV term sums over kernel taps, so
// inputs are normalized by the PAN maximum and the residual is reweighted by
// sqrt(N_ref/hw) to keep the balance size-independent.
double intensity_scale(const Plane& pan, int factor) {
    double m = 0.0;
    for (double v : pan.samples()) m = std::max(m, std::abs(v));
    if (m <= 0.0) throw NumericalError("kernel estimation: PAN image is identically zero");
    const double hw = static_cast<double>(pan.height() / factor) * (pan.width() / factor);
    return std::sqrt(16384.0 / hw) / m;
}

Kernel2D run_tgv_or_tv(bool with_p, const Plane& pan, const Plane& observation, int factor,
                       const KernelEstParams& params, TgvAdmmState* final_state,
                       const TgvIterHook& hook) {
    const int n = params.n;
    const ObservationSystem obs(pan, observation, factor, n, params.mu3);

    TgvAdmmState s;
    s.u = params.init == KernelInit::dirac ? Kernel2D::dirac(n).taps()
                                           : Plane(n, n, 1.0 / (static_cast<double>(n) * n));
    s.z = s.u;
    s.p1 = Plane(n, n);
    s.p2 = Plane(n, n);
    s.x = {diff_operator(s.u, DiffOp::grad_h), diff_operator(s.u, DiffOp::grad_v)};
    s.y = {Plane(n, n), Plane(n, n), Plane(n, n), Plane(n, n)};
    s.L1 = {Plane(n, n), Plane(n, n)};
    s.L2 = {Plane(n, n), Plane(n, n), Plane(n, n), Plane(n, n)};
    s.L3 = Plane(n, n);

    detail::Fft2D fft(n, n);
    std::vector<double> d1;  // symbol of alpha1*mu1*grad^T grad + mu3, TV-only path
    if (!with_p) {
        d1.resize(fft.size());
        for (int r = 0; r < n; ++r) {
            const double av2 = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * r / n);
            for (int c = 0; c < n; ++c) {
                const double ah2 = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * c / n);
                d1[static_cast<std::size_t>(r) * n + c] =
                    params.alpha1 * params.mu1 * (ah2 + av2) + params.mu3;
            }
        }
    }

    for (int t = 0; t < params.t_max; ++t) {
        // x-step: shrink on grad(u) - p + L1
        std::array<Plane, 2> gx = {diff_operator(s.u, DiffOp::grad_h) - s.p1 + s.L1[0],
                                   diff_operator(s.u, DiffOp::grad_v) - s.p2 + s.L1[1]};
        auto xs = shrink2(std::span<const Plane>(gx.data(), 2), 1.0 / params.mu1);
        s.x = {std::move(xs[0]), std::move(xs[1])};

        // y-step: shrink on E(p) + L2
        if (with_p) {
            std::array<Plane, 4> ep = symmetrized_gradient(s.p1, s.p2);
            std::array<Plane, 4> arg = {ep[0] + s.L2[0], ep[1] + s.L2[1], ep[2] + s.L2[2],
                                        ep[3] + s.L2[3]};
            auto ys = shrink2(std::span<const Plane>(arg.data(), 4), 1.0 / params.mu2);
            s.y = {std::move(ys[0]), std::move(ys[1]), std::move(ys[2]), std::move(ys[3])};
        }

        // z-step: quadratic solve then simplex projection
        Eigen::VectorXd z_anchor = as_vec(s.u) + as_vec(s.L3);
        Eigen::VectorXd z = project_simplex(obs.solve_z(z_anchor));
        s.z = as_plane(z, n, n);

        if (hook) hook(s, t);

        // {u,p}-step: the subproblem includes the mu3 tie to z - L3. The
        // listed stationarity system alone is blind to u's mean (gradients
        // annihilate constants) and leaves the u = z constraint unenforced.
        Plane anchor = s.z - s.L3;
        Plane u_new;
        if (with_p) {
            UpSolution sol = solve_up_core(s.x, s.y, s.L1, s.L2, params, params.mu3, &anchor);
            u_new = std::move(sol.u);
            s.p1 = std::move(sol.p1);
            s.p2 = std::move(sol.p2);
        } else {
            Plane B1 = (diff_adjoint(s.x[0] - s.L1[0], DiffOp::grad_h) +
                        diff_adjoint(s.x[1] - s.L1[1], DiffOp::grad_v)) *
                           (params.alpha1 * params.mu1) +
                       anchor * params.mu3;
            std::vector<cd> FB = fft.forward(B1);
            for (std::size_t i = 0; i < FB.size(); ++i) FB[i] /= d1[i];
            u_new = fft.backward_real(FB.data());
        }

        // multiplier steps
        s.L1[0] += (diff_operator(u_new, DiffOp::grad_h) - s.p1 - s.x[0]) * params.rho;
        s.L1[1] += (diff_operator(u_new, DiffOp::grad_v) - s.p2 - s.x[1]) * params.rho;
        if (with_p) {
            std::array<Plane, 4> ep = symmetrized_gradient(s.p1, s.p2);
            for (int j = 0; j < 4; ++j) s.L2[j] += (ep[j] - s.y[j]) * params.rho;
        }
        s.L3 += (u_new - s.z) * params.rho;

        const double delta = (s.u - u_new).norm();
        const double scale = std::max(u_new.norm(), 1e-300);
        s.u = std::move(u_new);
        s.iterations = t + 1;
        check_finite(s.u, "u", t);
        check_finite(s.z, "z", t);
        if (delta / scale < params.th) break;
    }

    if (final_state) *final_state = s;
    Kernel2D out(n, std::vector<double>(s.z.data(), s.z.data() + s.z.size()));
    return out;
}

Kernel2D run_l2(const Plane& pan, const Plane& observation, int factor,
                const KernelEstParams& params) {
    const int n = params.n;
    const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
    const ObservationSystem obs(pan, observation, factor, n, params.mu3);

    // assemble 2*alpha1*grad^T grad from the plane operators
    Eigen::MatrixXd K = obs.E().transpose() * obs.E();
    {
        Plane e(n, n);
        for (Eigen::Index j = 0; j < n2; ++j) {
            e.data()[j] = 1.0;
            Plane g = diff_adjoint(diff_operator(e, DiffOp::grad_h), DiffOp::grad_h) +
                      diff_adjoint(diff_operator(e, DiffOp::grad_v), DiffOp::grad_v);
            K.col(j) += 2.0 * params.alpha1 * as_vec(g);
            e.data()[j] = 0.0;
        }
    }
    K.diagonal().array() += 2.0 * params.alpha2 + params.mu3;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw NumericalError("l2 kernel estimation: normal matrix factorization failed");

    Eigen::VectorXd Etf = obs.E().transpose() * obs.f();
    Eigen::VectorXd u = params.init == KernelInit::dirac
                            ? Eigen::VectorXd(as_vec(Kernel2D::dirac(n).taps()))
                            : Eigen::VectorXd::Constant(n2, 1.0 / static_cast<double>(n2)).eval();
    Eigen::VectorXd z = u;
    Eigen::VectorXd L = Eigen::VectorXd::Zero(n2);

    for (int t = 0; t < params.t_max; ++t) {
        Eigen::VectorXd u_new = llt.solve(Etf + params.mu3 * (z - L));
        z = project_simplex(u_new + L);
        L += params.rho * (u_new - z);
        const double delta = (u - u_new).norm() / std::max(u_new.norm(), 1e-300);
        u = std::move(u_new);
        if (!u.allFinite() || !z.allFinite())
            throw NumericalError("l2 kernel estimation diverged at iteration " + std::to_string(t));
        if (delta < params.th) break;
    }
    return Kernel2D(n, std::vector<double>(z.data(), z.data() + z.size()));
}

}  // namespace

double estimation_intensity_scale(const Plane& pan, int factor) {
    return intensity_scale(pan, factor);
}

Kernel2D estimate_kernel_plane(KernelPrior prior, const Plane& pan, const Plane& observation,
                               int factor, const KernelEstParams& params,
                               TgvAdmmState* final_state, const TgvIterHook& before_up_solve) {
    params.validate();
    check_degenerate(pan);
    const double s = intensity_scale(pan, factor);
    Plane pan_n = pan * s;
    Plane obs_n = observation * s;
    switch (prior) {
    case KernelPrior::tgv2:
        return run_tgv_or_tv(true, pan_n, obs_n, factor, params, final_state, before_up_solve);
    case KernelPrior::tv:
        return run_tgv_or_tv(false, pan_n, obs_n, factor, params, final_state, before_up_solve);
    case KernelPrior::l2:
        return run_l2(pan_n, obs_n, factor, params);
    }
    throw ParamError("estimate_kernel_plane: unknown prior");
}

Kernel2D estimate_kernel_tgv(const MultiBandImage& lrms_subset, const Plane& pan,
                             const SpectralWeights& omega, int factor,
                             const KernelEstParams& params, TgvAdmmState* final_state,
                             const TgvIterHook& before_up_solve) {
    return estimate_kernel_plane(KernelPrior::tgv2, pan, combine_bands(lrms_subset, omega),
                                 factor, params, final_state, before_up_solve);
}

Kernel2D estimate_kernel_tv(const MultiBandImage& lrms_subset, const Plane& pan,
                            const SpectralWeights& omega, int factor,
                            const KernelEstParams& params) {
    return estimate_kernel_plane(KernelPrior::tv, pan, combine_bands(lrms_subset, omega),
                                 factor, params);
}

Kernel2D estimate_kernel_l2(const MultiBandImage& lrms_subset, const Plane& pan,
                            const SpectralWeights& omega, int factor,
                            const KernelEstParams& params) {
    return estimate_kernel_plane(KernelPrior::l2, pan, combine_bands(lrms_subset, omega),
                                 factor, params);
}

}  // namespace fbmp
