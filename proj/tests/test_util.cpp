#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fbmp/ops.hpp"

namespace fbmp::testutil {

Plane naive_circular_convolve(const Plane& img, const Kernel2D& k) {
    const int h = img.height(), w = img.width();
    const int C = k.center();
    Plane out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int tr = -C; tr <= C; ++tr)
                for (int tc = -C; tc <= C; ++tc)
                    s += k(tr + C, tc + C) * img.at_wrap(r - tr, c - tc);
            out(r, c) = s;
        }
    }
    return out;
}

Plane naive_box_mean(const Plane& img, int radius) {
    const int h = img.height(), w = img.width();
    Plane out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            int count = 0;
            for (int i = std::max(0, r - radius); i <= std::min(h - 1, r + radius); ++i)
                for (int j = std::max(0, c - radius); j <= std::min(w - 1, c + radius); ++j) {
                    s += img(i, j);
                    ++count;
                }
            out(r, c) = s / count;
        }
    }
    return out;
}

Eigen::MatrixXd dense_from_operator(const std::function<Plane(const Plane&)>& op, int h, int w) {
    const Eigen::Index n = static_cast<Eigen::Index>(h) * w;
    Plane e(h, w);
    Plane probe = op(e);
    const Eigen::Index m = static_cast<Eigen::Index>(probe.height()) * probe.width();
    Eigen::MatrixXd A(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e.data()[j] = 1.0;
        Plane col = op(e);
        A.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), m);
        e.data()[j] = 0.0;
    }
    return A;
}

Plane make_texture(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // smooth background: a couple of low-frequency waves
    Plane smooth(h, w);
    const double f1 = 1.0 + 2.0 * uni(rng), f2 = 1.0 + 2.0 * uni(rng);
    const double ph1 = 2.0 * std::numbers::pi * uni(rng), ph2 = 2.0 * std::numbers::pi * uni(rng);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            smooth(r, c) = 0.5 + 0.25 * std::sin(2.0 * std::numbers::pi * f1 * r / h + ph1) +
                           0.25 * std::cos(2.0 * std::numbers::pi * f2 * c / w + ph2);

    // sharp structures: random rectangles
    Plane rect(h, w, 0.3);
    const int nrect = 6 + static_cast<int>(uni(rng) * 6);
    for (int i = 0; i < nrect; ++i) {
        const int r0 = static_cast<int>(uni(rng) * h), c0 = static_cast<int>(uni(rng) * w);
        const int rh = 2 + static_cast<int>(uni(rng) * h / 3), rw = 2 + static_cast<int>(uni(rng) * w / 3);
        const double v = uni(rng);
        for (int r = r0; r < std::min(h, r0 + rh); ++r)
            for (int c = c0; c < std::min(w, c0 + rw); ++c) rect(r, c) = v;
    }

    // fine grain: lightly smoothed noise
    Plane grain(h, w);
    for (double& v : grain.samples()) v = uni(rng);
    grain = box_mean(grain, 1);

    Plane out(h, w);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = 0.40 * smooth.data()[i] + 0.35 * rect.data()[i] + 0.25 * grain.data()[i];

    // squeeze into [0.05, 0.95]
    const double lo = out.min(), hi = out.max();
    const double span = hi > lo ? hi - lo : 1.0;
    for (double& v : out.samples()) v = 0.05 + 0.90 * (v - lo) / span;
    return out;
}

Plane invert_circular_box(const Plane& img, int window) {
    using cd = std::complex<double>;
    const int h = img.height(), w = img.width();
    const int lead = (window - 1) / 2;
    auto symbol_1d = [&](int k, int n) {
        cd s = 0.0;
        for (int t = -lead; t < window - lead; ++t)
            s += std::exp(cd(0.0, -2.0 * std::numbers::pi * k * t / n));
        return s / static_cast<double>(window);
    };

    // naive row-column DFT
    std::vector<cd> spec(static_cast<std::size_t>(h) * w);
    std::vector<cd> tmp(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int kc = 0; kc < w; ++kc) {
            cd s = 0.0;
            for (int c = 0; c < w; ++c)
                s += img(r, c) * std::exp(cd(0.0, -2.0 * std::numbers::pi * kc * c / w));
            tmp[static_cast<std::size_t>(r) * w + kc] = s;
        }
    for (int kc = 0; kc < w; ++kc)
        for (int kr = 0; kr < h; ++kr) {
            cd s = 0.0;
            for (int r = 0; r < h; ++r)
                s += tmp[static_cast<std::size_t>(r) * w + kc] *
                     std::exp(cd(0.0, -2.0 * std::numbers::pi * kr * r / h));
            spec[static_cast<std::size_t>(kr) * w + kc] = s;
        }

    for (int kr = 0; kr < h; ++kr)
        for (int kc = 0; kc < w; ++kc) {
            const cd sym = symbol_1d(kr, h) * symbol_1d(kc, w);
            if (std::abs(sym) < 1e-9)
                throw std::runtime_error("invert_circular_box: spectral zero in the box window");
            spec[static_cast<std::size_t>(kr) * w + kc] /= sym;
        }

    Plane out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            cd s = 0.0;
            for (int kr = 0; kr < h; ++kr)
                for (int kc = 0; kc < w; ++kc)
                    s += spec[static_cast<std::size_t>(kr) * w + kc] *
                         std::exp(cd(0.0, 2.0 * std::numbers::pi *
                                              (static_cast<double>(kr) * r / h +
                                               static_cast<double>(kc) * c / w)));
            out(r, c) = s.real() / (static_cast<double>(h) * w);
        }
    return out;
}

Scene make_scene(int bands, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Plane base = make_texture(h, w, seed * 7919 + 1);

    Scene s;
    std::vector<Plane> planes;
    for (int b = 0; b < bands; ++b) {
        Plane detail = make_texture(h, w, seed * 7919 + 2 + b);
        const double mix = 0.65 + 0.2 * uni(rng);
        Plane band(h, w);
        for (std::size_t i = 0; i < band.size(); ++i)
            band.data()[i] = mix * base.data()[i] + (1.0 - mix) * detail.data()[i];
        planes.push_back(std::move(band));
    }
    s.hrms = MultiBandImage(std::move(planes));

    s.pan_weights.resize(bands);
    double wsum = 0.0;
    for (double& v : s.pan_weights) {
        v = 0.5 + uni(rng);
        wsum += v;
    }
    for (double& v : s.pan_weights) v /= wsum;

    s.pan = Plane(h, w);
    for (int b = 0; b < bands; ++b)
        for (std::size_t i = 0; i < s.pan.size(); ++i)
            s.pan.data()[i] += s.pan_weights[b] * s.hrms.band(b).data()[i];
    return s;
}

}  // namespace fbmp::testutil
