#include "fbmp/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fbmp {

namespace {

constexpr double kPeak = 255.0;

double mse_plane(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw DimensionError("metrics: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr_from_mse(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(kPeak / std::sqrt(mse));
}

void check_shapes(const MultiBandImage& a, const MultiBandImage& b) {
    if (a.band_count() != b.band_count() || a.height() != b.height() || a.width() != b.width())
        throw DimensionError("metrics: image shapes differ");
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace

Plane crop_border(const Plane& img, int margin) {
    if (margin < 0) throw ParamError("crop_border: negative margin");
    if (margin == 0) return img;
    if (2 * margin >= std::min(img.height(), img.width()))
        throw DimensionError("crop_border: margin leaves no pixels");
    Plane out(img.height() - 2 * margin, img.width() - 2 * margin);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            out(r, c) = img(r + margin, c + margin);
    return out;
}

MultiBandImage crop_border(const MultiBandImage& img, int margin) {
    std::vector<Plane> bands;
    bands.reserve(img.band_count());
    for (const Plane& b : img.bands()) bands.push_back(crop_border(b, margin));
    return MultiBandImage(std::move(bands));
}

double psnr_plane(const Plane& est, const Plane& ref) { return psnr_from_mse(mse_plane(est, ref)); }

std::pair<std::vector<double>, double> psnr_avg(const MultiBandImage& est,
                                                const MultiBandImage& ref) {
    check_shapes(est, ref);
    std::vector<double> per_band;
    per_band.reserve(est.band_count());
    double sum = 0.0;
    for (int i = 0; i < est.band_count(); ++i) {
        per_band.push_back(psnr_plane(est.band(i), ref.band(i)));
        sum += per_band.back();
    }
    return {per_band, sum / est.band_count()};
}

double psnr_reg_avg(const MultiBandImage& est, const MultiBandImage& ref) {
    check_shapes(est, ref);
    double sum = 0.0;
    for (int i = 0; i < est.band_count(); ++i) {
        const Plane& e = est.band(i);
        const Plane& r = ref.band(i);
        const double me = e.mean(), mr = r.mean();
        double var = 0.0, cov = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            var += (e.data()[j] - me) * (e.data()[j] - me);
            cov += (e.data()[j] - me) * (r.data()[j] - mr);
        }
        double a = 0.0, b = mr;  // constant estimate fits the reference mean
        if (var > 0.0) {
            a = cov / var;
            b = mr - a * me;
        }
        double mse = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            const double d = a * e.data()[j] + b - r.data()[j];
            mse += d * d;
        }
        sum += psnr_from_mse(mse / static_cast<double>(e.size()));
    }
    return sum / est.band_count();
}

double ergas(const MultiBandImage& est, const MultiBandImage& ref, int factor) {
    check_shapes(est, ref);
    if (factor < 1) throw ParamError("ergas: factor must be >= 1");
    double acc = 0.0;
    for (int i = 0; i < est.band_count(); ++i) {
        const double mu = ref.band(i).mean();
        if (mu == 0.0) throw NumericalError("ergas: reference band mean is zero");
        const double rmse = std::sqrt(mse_plane(est.band(i), ref.band(i)));
        acc += (rmse / mu) * (rmse / mu);
    }
    return 100.0 / factor * std::sqrt(acc / est.band_count());
}

double sam_deg(const MultiBandImage& est, const MultiBandImage& ref) {
    check_shapes(est, ref);
    const int nb = est.band_count();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < est.band(0).size(); ++j) {
        double dot = 0.0, ne = 0.0, nr = 0.0;
        for (int i = 0; i < nb; ++i) {
            const double e = est.band(i).data()[j];
            const double r = ref.band(i).data()[j];
            dot += e * r;
            ne += e * e;
            nr += r * r;
        }
        if (ne == 0.0 || nr == 0.0) continue;  // zero spectral vectors carry no angle
        double cosv = dot / std::sqrt(ne * nr);
        cosv = std::clamp(cosv, -1.0, 1.0);
        acc += std::acos(cosv);
        ++count;
    }
    if (count == 0) return 0.0;
    return acc / count * 180.0 / std::numbers::pi;
}

double rase(const MultiBandImage& est, const MultiBandImage& ref) {
    check_shapes(est, ref);
    double mu = 0.0;
    for (const Plane& b : ref.bands()) mu += b.mean();
    mu /= ref.band_count();
    if (mu == 0.0) throw NumericalError("rase: mean of reference image is zero");
    double acc = 0.0;
    for (int i = 0; i < est.band_count(); ++i) acc += mse_plane(est.band(i), ref.band(i));
    return 100.0 / mu * std::sqrt(acc / est.band_count());
}

double ssim_plane(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) throw DimensionError("ssim: shape mismatch");
    constexpr int kRadius = 5;  // 11x11 window
    constexpr double kSigma = 1.5;
    const double c1 = (0.01 * kPeak) * (0.01 * kPeak);
    const double c2 = (0.03 * kPeak) * (0.03 * kPeak);
    const int h = a.height(), w = a.width();
    if (h < 2 * kRadius + 1 || w < 2 * kRadius + 1)
        throw DimensionError("ssim: image smaller than the 11x11 window");

    double win[2 * kRadius + 1][2 * kRadius + 1];
    double wsum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i)
        for (int j = -kRadius; j <= kRadius; ++j) {
            win[i + kRadius][j + kRadius] = std::exp(-(i * i + j * j) / (2.0 * kSigma * kSigma));
            wsum += win[i + kRadius][j + kRadius];
        }
    for (auto& row : win)
        for (double& v : row) v /= wsum;

    // valid region only: windows fully inside the image
    double acc = 0.0;
    std::size_t count = 0;
    for (int r = kRadius; r < h - kRadius; ++r) {
        for (int c = kRadius; c < w - kRadius; ++c) {
            double ma = 0.0, mb = 0.0;
            for (int i = -kRadius; i <= kRadius; ++i)
                for (int j = -kRadius; j <= kRadius; ++j) {
                    const double wgt = win[i + kRadius][j + kRadius];
                    ma += wgt * a(r + i, c + j);
                    mb += wgt * b(r + i, c + j);
                }
            double va = 0.0, vb = 0.0, cab = 0.0;
            for (int i = -kRadius; i <= kRadius; ++i)
                for (int j = -kRadius; j <= kRadius; ++j) {
                    const double wgt = win[i + kRadius][j + kRadius];
                    const double da = a(r + i, c + j) - ma;
                    const double db = b(r + i, c + j) - mb;
                    va += wgt * da * da;
                    vb += wgt * db * db;
                    cab += wgt * da * db;
                }
            const double num = (2.0 * ma * mb + c1) * (2.0 * cab + c2);
            const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

double ssim_avg(const MultiBandImage& est, const Plane& pan) {
    if (est.height() != pan.height() || est.width() != pan.width())
        throw DimensionError("ssim_avg: shape mismatch with the PAN image");
    double acc = 0.0;
    for (const Plane& b : est.bands()) acc += ssim_plane(b, pan);
    return acc / est.band_count();
}

double kernel_rel_error_pct(const Kernel2D& est, const Kernel2D& truth) {
    const int n = std::max(est.size(), truth.size());
    auto padded = [n](const Kernel2D& k) {
        Kernel2D out(n);
        const int off = (n - k.size()) / 2;
        for (int r = 0; r < k.size(); ++r)
            for (int c = 0; c < k.size(); ++c) out(r + off, c + off) = k(r, c);
        return out;
    };
    Kernel2D e = padded(est), t = padded(truth);
    double num = 0.0, den = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double d = t(r, c) - e(r, c);
            num += d * d;
            den += t(r, c) * t(r, c);
        }
    if (den == 0.0) throw NumericalError("kernel_rel_error: ground-truth kernel is zero");
    return 100.0 * std::sqrt(num / den);
}

std::string MetricsReport::to_text() const {
    std::ostringstream os;
    os << "psnr_avg = " << fmt(psnr_avg) << "\n";
    for (std::size_t i = 0; i < psnr_per_band.size(); ++i)
        os << "psnr_band_" << i << " = " << fmt(psnr_per_band[i]) << "\n";
    os << "psnr_reg_avg = " << fmt(psnr_reg_avg) << "\n";
    if (ergas) os << "ergas = " << fmt(*ergas) << "\n";
    if (sam_deg) os << "sam_deg = " << fmt(*sam_deg) << "\n";
    if (rase) os << "rase = " << fmt(*rase) << "\n";
    if (ssim_avg) os << "ssim_avg = " << fmt(*ssim_avg) << "\n";
    if (kernel_rel_error_pct) os << "kernel_rel_error_pct = " << fmt(*kernel_rel_error_pct) << "\n";
    os << "# psnr: 20*log10(255/sqrt(MSE)), mean over bands; intensities scaled to [0,255]\n";
    os << "# psnr_reg: per band best affine fit a*est+b before PSNR (a=cov/var, b=residual mean)\n";
    if (ergas) os << "# ergas: 100*(1/c)*sqrt(mean_i (RMSE_i/mean(ref_i))^2)\n";
    if (sam_deg) os << "# sam: mean over pixels of arccos(<v,vhat>/(|v||vhat|)) in degrees\n";
    if (rase) os << "# rase: (100/mean(ref))*sqrt(mean_i MSE_i)\n";
    if (ssim_avg)
        os << "# ssim: mean over bands of SSIM vs PAN (11x11 Gaussian window sigma=1.5, "
              "K1=0.01, K2=0.03, L=255)\n";
    if (kernel_rel_error_pct) os << "# kernel_rel_error: 100*||U-Uhat||_F/||U||_F\n";
    return os.str();
}

std::string MetricsReport::csv_header() {
    return "psnr_avg,psnr_reg_avg,ergas,sam_deg,rase,ssim_avg,kernel_rel_error_pct";
}

std::string MetricsReport::to_csv_row() const {
    std::ostringstream os;
    os << fmt(psnr_avg) << ',' << fmt(psnr_reg_avg) << ',' << fmt_opt(ergas) << ','
       << fmt_opt(sam_deg) << ',' << fmt_opt(rase) << ',' << fmt_opt(ssim_avg) << ','
       << fmt_opt(kernel_rel_error_pct);
    return os.str();
}

}  // namespace fbmp
