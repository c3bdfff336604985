#include "fbmp/pansharpen.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fbmp/ops.hpp"
#include "fft_util.hpp"

namespace fbmp {

namespace {

using cd = std::complex<double>;

Eigen::Map<const Eigen::VectorXd> as_vec(const Plane& p) {
    return {p.data(), static_cast<Eigen::Index>(p.size())};
}

// Uniform view of the prior operator: spatial application, adjoint, and its
// transfer function on an arbitrary grid.
class PriorOp {
public:
    PriorOp(const PansharpenParams& params, int rows, int cols) : kind_(params.prior) {
        if (kind_ == PriorKind::custom)
            conv_ = std::make_unique<detail::SpectralConv>(params.prior_kernel, rows, cols);
    }

    Plane apply(const Plane& img) {
        switch (kind_) {
        case PriorKind::laplacian: return diff_operator(img, DiffOp::laplacian);
        case PriorKind::identity: return img;
        case PriorKind::custom: return conv_->apply(img);
        }
        throw ParamError("unknown prior kind");
    }

    Plane apply_adjoint(const Plane& img) {
        switch (kind_) {
        case PriorKind::laplacian: return diff_operator(img, DiffOp::laplacian);
        case PriorKind::identity: return img;
        case PriorKind::custom: return conv_->apply_adjoint(img);
        }
        throw ParamError("unknown prior kind");
    }

    std::vector<cd> spectrum(int rows, int cols) const {
        std::vector<cd> s(static_cast<std::size_t>(rows) * cols);
        switch (kind_) {
        case PriorKind::laplacian:
            for (int r = 0; r < rows; ++r) {
                const double cv = std::cos(2.0 * std::numbers::pi * r / rows);
                for (int c = 0; c < cols; ++c) {
                    const double ch = std::cos(2.0 * std::numbers::pi * c / cols);
                    s[static_cast<std::size_t>(r) * cols + c] = 4.0 - 2.0 * cv - 2.0 * ch;
                }
            }
            break;
        case PriorKind::identity:
            std::fill(s.begin(), s.end(), cd(1.0));
            break;
        case PriorKind::custom:
            s = conv_->kernel_spectrum();
            break;
        }
        return s;
    }

private:
    PriorKind kind_;
    std::unique_ptr<detail::SpectralConv> conv_;
};

template <class F>
void annotate_channel_errors(int channel, F&& f) {
    const std::string tag = "channel " + std::to_string(channel) + ": ";
    try {
        f();
    } catch (const DimensionError& e) {
        throw DimensionError(tag + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(tag + e.what());
    } catch (const ParamError& e) {
        throw ParamError(tag + e.what());
    }
}

}  // namespace

void PansharpenParams::validate() const {
    if (!(lambda > 0)) throw ParamError("pansharpen: lambda must be positive");
    if (radius < 1) throw ParamError("pansharpen: radius must be >= 1");
    if (!(eps > 0)) throw ParamError("pansharpen: eps must be positive");
    if (!(cg_tol > 0)) throw ParamError("pansharpen: cg_tol must be positive");
    if (cg_max_iter < 1) throw ParamError("pansharpen: cg_max_iter must be >= 1");
    if (threads < 0) throw ParamError("pansharpen: threads must be >= 0");
    if (prior == PriorKind::custom && prior_kernel.size() == 0)
        throw ParamError("pansharpen: custom prior requires a kernel");
}

Plane apply_prior(const Plane& img, const PansharpenParams& params) {
    PriorOp op(params, img.height(), img.width());
    return op.apply(img);
}

Plane apply_prior_adjoint(const Plane& img, const PansharpenParams& params) {
    PriorOp op(params, img.height(), img.width());
    return op.apply_adjoint(img);
}

MattingMatrix MattingMatrix::build(const Plane& guide, int radius, double eps) {
    if (radius < 1) throw ParamError("matting matrix: radius must be >= 1");
    const int h = guide.height(), w = guide.width();
    if (2 * radius + 1 > std::min(h, w))
        throw DimensionError("matting matrix: window larger than image");

    MattingMatrix M;
    M.height_ = h;
    M.width_ = w;
    M.radius_ = radius;
    M.eps_ = eps;
    M.window_mean_ = box_mean(guide, radius);
    {
        Plane sq = guide;
        for (std::size_t i = 0; i < sq.size(); ++i) sq.data()[i] *= sq.data()[i];
        Plane m2 = box_mean(sq, radius);
        Plane var(h, w);
        for (std::size_t i = 0; i < var.size(); ++i) {
            const double mu = M.window_mean_.data()[i];
            var.data()[i] = m2.data()[i] - mu * mu;
        }
        M.window_var_ = std::move(var);
    }

    // Accumulate into a band structure: each pixel couples only to pixels
    // within Chebyshev distance 2*radius.
    const int band = 4 * radius + 1;
    const int nw = 2 * radius + 1;
    const double wsize = static_cast<double>(nw) * nw;
    std::vector<double> bands(static_cast<std::size_t>(h) * w * band * band, 0.0);
    auto band_at = [&](int pr, int pc, int dr, int dc) -> double& {
        const std::size_t pix = static_cast<std::size_t>(pr) * w + pc;
        return bands[(pix * band + (dr + 2 * radius)) * band + (dc + 2 * radius)];
    };

    for (int kr = radius; kr < h - radius; ++kr) {
        for (int kc = radius; kc < w - radius; ++kc) {
            const double mu = M.window_mean_(kr, kc);
            const double denom = eps / wsize + M.window_var_(kr, kc);
            for (int mr = kr - radius; mr <= kr + radius; ++mr) {
                for (int mc = kc - radius; mc <= kc + radius; ++mc) {
                    const double im = guide(mr, mc) - mu;
                    for (int nr = kr - radius; nr <= kr + radius; ++nr) {
                        for (int nc = kc - radius; nc <= kc + radius; ++nc) {
                            const double in = guide(nr, nc) - mu;
                            double v = -(1.0 + im * in / denom) / wsize;
                            if (mr == nr && mc == nc) v += 1.0;
                            band_at(mr, mc, nr - mr, nc - mc) += v;
                        }
                    }
                }
            }
        }
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> mat(static_cast<Eigen::Index>(h) * w,
                                                     static_cast<Eigen::Index>(h) * w);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(h) * w * band);
    for (int pr = 0; pr < h; ++pr) {
        for (int pc = 0; pc < w; ++pc) {
            const Eigen::Index row = static_cast<Eigen::Index>(pr) * w + pc;
            for (int dr = -2 * radius; dr <= 2 * radius; ++dr) {
                const int nr = pr + dr;
                if (nr < 0 || nr >= h) continue;
                for (int dc = -2 * radius; dc <= 2 * radius; ++dc) {
                    const int nc = pc + dc;
                    if (nc < 0 || nc >= w) continue;
                    const double v = band_at(pr, pc, dr, dc);
                    if (v != 0.0)
                        trips.emplace_back(row, static_cast<Eigen::Index>(nr) * w + nc, v);
                }
            }
        }
    }
    mat.setFromTriplets(trips.begin(), trips.end());
    M.matrix_ = std::move(mat);
    return M;
}

Plane MattingMatrix::apply(const Plane& p) const {
    if (p.height() != height_ || p.width() != width_)
        throw DimensionError("matting matrix: plane shape mismatch");
    Eigen::VectorXd v = matrix_ * as_vec(p);
    return Plane(height_, width_, std::vector<double>(v.data(), v.data() + v.size()));
}

MattingMatrix build_matting_matrix(const Plane& guide, int radius, double eps) {
    return MattingMatrix::build(guide, radius, eps);
}

Plane warmstart_cg(const Plane& x_i, const Kernel2D& k, int factor, const MattingMatrix& M,
                   const PansharpenParams& params, int max_iters, bool error_on_cap,
                   double* final_residual) {
    const int H = M.height(), W = M.width();
    if (x_i.height() * factor != H || x_i.width() * factor != W)
        throw DimensionError("warmstart: LR channel dimensions must be image/factor");

    detail::SpectralConv conv(k, H, W);
    PriorOp prior(params, H, W);

    auto A = [&](const Plane& z) {
        Plane data_term = conv.apply_adjoint(
            upsample_adjoint(downsample(conv.apply(z), factor), factor));
        Plane prior_term = prior.apply_adjoint(M.apply(prior.apply(z))) * params.lambda;
        return data_term + prior_term;
    };

    Plane rhs = conv.apply_adjoint(upsample_adjoint(x_i, factor));
    const double rhs_norm = rhs.norm();
    Plane z(H, W);
    if (rhs_norm == 0.0) {
        if (final_residual) *final_residual = 0.0;
        return z;
    }

    Plane r = rhs;
    Plane p = r;
    double rs = dot(r, r);
    bool converged = false;
    for (int it = 0; it < max_iters; ++it) {
        Plane Ap = A(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0)) {
            if (std::sqrt(rs) <= 1e-12 * rhs_norm) { converged = true; break; }
            throw NumericalError("warmstart: conjugate gradients hit a non-positive curvature "
                                 "direction");
        }
        const double alpha = rs / pAp;
        z += p * alpha;
        r -= Ap * alpha;
        const double step = std::abs(alpha) * p.norm();
        const double rs_new = dot(r, r);
        if (step <= params.cg_tol * std::max(z.norm(), 1e-300)) {
            converged = true;
            break;
        }
        p = r + p * (rs_new / rs);
        rs = rs_new;
    }
    const double resid = (A(z) - rhs).norm();
    if (final_residual) *final_residual = resid;
    if (!converged && error_on_cap)
        throw NumericalError("warmstart: conjugate gradients did not converge in " +
                             std::to_string(max_iters) + " iterations (residual " +
                             std::to_string(resid / rhs_norm) + " relative)");
    return z;
}

Plane warmstart_channel(const Plane& x_i, const Plane& pan, const Kernel2D& k, int factor,
                        const MattingMatrix& M, const PansharpenParams& params) {
    params.validate();
    if (pan.height() != M.height() || pan.width() != M.width())
        throw DimensionError("warmstart: matting matrix was not built on the PAN grid");
    return warmstart_cg(x_i, k, factor, M, params, params.cg_max_iter, true);
}

AffineCoeffMaps guided_coeffs(const Plane& input, const Plane& guide, int radius, double eps) {
    if (!input.same_shape(guide)) throw DimensionError("guided_coeffs: shape mismatch");
    if (!(eps > 0)) throw ParamError("guided_coeffs: eps must be positive");

    Plane gi(input.height(), input.width());
    Plane gg(input.height(), input.width());
    for (std::size_t i = 0; i < gi.size(); ++i) {
        gi.data()[i] = guide.data()[i] * input.data()[i];
        gg.data()[i] = guide.data()[i] * guide.data()[i];
    }
    AffineCoeffMaps m;
    m.guide_mean = box_mean(guide, radius);
    m.input_mean = box_mean(input, radius);
    Plane corr_gi = box_mean(gi, radius);
    Plane corr_gg = box_mean(gg, radius);

    m.guide_var = Plane(input.height(), input.width());
    m.a = Plane(input.height(), input.width());
    m.c = Plane(input.height(), input.width());
    for (std::size_t i = 0; i < m.a.size(); ++i) {
        const double mu = m.guide_mean.data()[i];
        const double var = corr_gg.data()[i] - mu * mu;
        const double cov = corr_gi.data()[i] - mu * m.input_mean.data()[i];
        m.guide_var.data()[i] = var;
        m.a.data()[i] = cov / (var + eps);
        m.c.data()[i] = m.input_mean.data()[i] - m.a.data()[i] * mu;
    }
    return m;
}

Plane guided_output(const AffineCoeffMaps& coeffs, const Plane& guide, int radius) {
    if (!coeffs.a.same_shape(guide)) throw DimensionError("guided_output: shape mismatch");
    Plane abar = box_mean(coeffs.a, radius);
    Plane cbar = box_mean(coeffs.c, radius);
    Plane out(guide.height(), guide.width());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = abar.data()[i] * guide.data()[i] + cbar.data()[i];
    return out;
}

Plane solve_channel_fft(const Plane& x_i, const Kernel2D& k, int factor, const Plane& v,
                        const PansharpenParams& params) {
    params.validate();
    const int H = v.height(), W = v.width();
    if (x_i.height() * factor != H || x_i.width() * factor != W)
        throw DimensionError("solve_channel_fft: LR/HR dimensions inconsistent with factor");
    const int h = x_i.height(), w = x_i.width();
    const int c2 = factor * factor;
    const double lambda = params.lambda;

    detail::Fft2D fft_hr(H, W);
    detail::Fft2D fft_lr(h, w);
    std::vector<cd> bhat = fft_hr.forward(embed_kernel(k, H, W));
    PriorOp prior(params, H, W);
    std::vector<cd> lhat = prior.spectrum(H, W);
    std::vector<cd> xhat = fft_lr.forward(x_i);
    std::vector<cd> vhat = fft_hr.forward(v);

    std::vector<cd> zhat(bhat.size());
    Eigen::MatrixXcd A(c2, c2);
    Eigen::VectorXcd rhs(c2), bg(c2);
    std::vector<std::size_t> idx(c2);

    for (int kl = 0; kl < h; ++kl) {
        for (int ll = 0; ll < w; ++ll) {
            for (int a = 0; a < factor; ++a)
                for (int b = 0; b < factor; ++b)
                    idx[static_cast<std::size_t>(a) * factor + b] =
                        static_cast<std::size_t>(kl + a * h) * W + (ll + b * w);

            for (int g = 0; g < c2; ++g) bg(g) = bhat[idx[g]];
            const cd xg = xhat[static_cast<std::size_t>(kl) * w + ll];
            for (int g = 0; g < c2; ++g) {
                for (int gp = 0; gp < c2; ++gp)
                    A(g, gp) = std::conj(bg(g)) * bg(gp) / static_cast<double>(c2);
                A(g, g) += lambda * std::norm(lhat[idx[g]]);
                rhs(g) = std::conj(bg(g)) * xg + lambda * std::conj(lhat[idx[g]]) * vhat[idx[g]];
            }

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
            const Eigen::VectorXd& ev = es.eigenvalues();  // ascending, real
            if (!(ev(0) > 0.0) || ev(c2 - 1) > 1e14 * ev(0))
                throw NumericalError("solve_channel_fft: alias-group system condition number "
                                     "exceeds 1e14 (prior transfer function too small)");
            Eigen::VectorXcd sol =
                es.eigenvectors() *
                ((es.eigenvectors().adjoint() * rhs).array() / ev.array().cast<cd>()).matrix();
            for (int g = 0; g < c2; ++g) zhat[idx[g]] = sol(g);
        }
    }
    return fft_hr.backward_real(zhat.data());
}

MultiBandImage pansharpen(const MultiBandImage& lrms, const Plane& pan, const Kernel2D& k,
                          int factor, const PansharpenParams& params) {
    params.validate();
    if (pan.height() != factor * lrms.height() || pan.width() != factor * lrms.width())
        throw DimensionError("pansharpen: PAN dimensions must be factor times the LRMS dimensions");

    // work on [0,1]-normalized intensities; the prior weights assume it
    double peak = pan.max();
    for (const Plane& b : lrms.bands()) peak = std::max(peak, b.max());
    const double scale = peak > 0.0 ? 1.0 / peak : 1.0;

    Plane pan_n = pan * scale;
    PriorOp prior(params, pan.height(), pan.width());
    Plane lpan = prior.apply(pan_n);
    const MattingMatrix M = MattingMatrix::build(lpan, params.radius, params.eps);

    const int nb = lrms.band_count();
    std::vector<Plane> out(nb);
    std::vector<std::exception_ptr> errors(nb);
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= nb) return;
            try {
                annotate_channel_errors(i, [&] {
                    Plane x_n = lrms.band(i) * scale;
                    Plane z0 = warmstart_channel(x_n, pan_n, k, factor, M, params);
                    PriorOp ch_prior(params, pan.height(), pan.width());
                    AffineCoeffMaps coeffs =
                        guided_coeffs(ch_prior.apply(z0), lpan, params.radius, params.eps);
                    Plane v = guided_output(coeffs, lpan, params.radius);
                    Plane z = solve_channel_fft(x_n, k, factor, v, params);
                    out[i] = z * (1.0 / scale);
                });
            } catch (...) {
                errors[i] = std::current_exception();
                return;
            }
        }
    };

    int nthreads = params.threads > 0 ? params.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp(nthreads, 1, nb);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (int i = 0; i < nb; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
    return MultiBandImage(std::move(out));
}

}  // namespace fbmp
