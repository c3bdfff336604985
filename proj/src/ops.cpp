#include "fbmp/ops.hpp"

#include <algorithm>

#include "fft_util.hpp"

namespace fbmp {

Plane embed_kernel(const Kernel2D& k, int height, int width) {
    if (k.size() > height || k.size() > width)
        throw DimensionError("kernel larger than image");
    Plane out(height, width);
    const int c = k.center();
    for (int r = 0; r < k.size(); ++r) {
        for (int col = 0; col < k.size(); ++col) {
            int rr = (r - c) % height; if (rr < 0) rr += height;
            int cc = (col - c) % width; if (cc < 0) cc += width;
            out(rr, cc) += k(r, col);
        }
    }
    return out;
}

Plane circular_convolve(const Plane& img, const Kernel2D& k) {
    if (img.empty()) throw DimensionError("circular_convolve: empty image");
    detail::SpectralConv conv(k, img.height(), img.width());
    return conv.apply(img);
}

Plane circular_convolve_adjoint(const Plane& img, const Kernel2D& k) {
    if (img.empty()) throw DimensionError("circular_convolve_adjoint: empty image");
    detail::SpectralConv conv(k, img.height(), img.width());
    return conv.apply_adjoint(img);
}

Plane downsample(const Plane& img, int factor) {
    if (factor < 1) throw ParamError("downsample: factor must be >= 1");
    if (img.height() % factor != 0 || img.width() % factor != 0)
        throw DimensionError("downsample: dimensions not divisible by factor");
    Plane out(img.height() / factor, img.width() / factor);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            out(r, c) = img(r * factor, c * factor);
    return out;
}

Plane upsample_adjoint(const Plane& img, int factor) {
    if (factor < 1) throw ParamError("upsample_adjoint: factor must be >= 1");
    Plane out(img.height() * factor, img.width() * factor);
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            out(r * factor, c * factor) = img(r, c);
    return out;
}

Plane diff_operator(const Plane& img, DiffOp which) {
    const int h = img.height(), w = img.width();
    Plane out(h, w);
    switch (which) {
    case DiffOp::grad_h:
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                out(r, c) = img(r, (c + 1) % w) - img(r, c);
        break;
    case DiffOp::grad_v:
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                out(r, c) = img((r + 1) % h, c) - img(r, c);
        break;
    case DiffOp::laplacian:
        for (int r = 0; r < h; ++r) {
            const int rm = (r + h - 1) % h, rp = (r + 1) % h;
            for (int c = 0; c < w; ++c) {
                const int cm = (c + w - 1) % w, cp = (c + 1) % w;
                out(r, c) = 4.0 * img(r, c) - img(rm, c) - img(rp, c) - img(r, cm) - img(r, cp);
            }
        }
        break;
    }
    return out;
}

Plane diff_adjoint(const Plane& img, DiffOp which) {
    const int h = img.height(), w = img.width();
    Plane out(h, w);
    switch (which) {
    case DiffOp::grad_h:
        // transpose of the forward difference: g(c-1) - g(c)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                out(r, c) = img(r, (c + w - 1) % w) - img(r, c);
        break;
    case DiffOp::grad_v:
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                out(r, c) = img((r + h - 1) % h, c) - img(r, c);
        break;
    case DiffOp::laplacian:
        return diff_operator(img, DiffOp::laplacian);  // symmetric stencil
    }
    return out;
}

Plane box_mean(const Plane& img, int radius) {
    if (radius < 0) throw ParamError("box_mean: negative radius");
    const int h = img.height(), w = img.width();
    if (2 * radius + 1 > std::min(h, w))
        throw DimensionError("box_mean: window larger than image");
    if (radius == 0) return img;

    // summed-area table with a zero guard row/column
    std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    auto S = [&](int r, int c) -> double& { return sat[static_cast<std::size_t>(r) * (w + 1) + c]; };
    for (int r = 1; r <= h; ++r)
        for (int c = 1; c <= w; ++c)
            S(r, c) = img(r - 1, c - 1) + S(r - 1, c) + S(r, c - 1) - S(r - 1, c - 1);

    Plane out(h, w);
    for (int r = 0; r < h; ++r) {
        const int r0 = std::max(0, r - radius), r1 = std::min(h - 1, r + radius);
        for (int c = 0; c < w; ++c) {
            const int c0 = std::max(0, c - radius), c1 = std::min(w - 1, c + radius);
            const double total = S(r1 + 1, c1 + 1) - S(r0, c1 + 1) - S(r1 + 1, c0) + S(r0, c0);
            out(r, c) = total / ((r1 - r0 + 1) * (c1 - c0 + 1));
        }
    }
    return out;
}

Plane circular_box_blur(const Plane& img, int window) {
    if (window < 1) throw ParamError("circular_box_blur: window must be >= 1");
    if (window > std::min(img.height(), img.width()))
        throw DimensionError("circular_box_blur: window larger than image");
    const int h = img.height(), w = img.width();
    const int lead = (window - 1) / 2;  // taps at offsets [-lead, window-1-lead]
    const double gain = 1.0 / window;

    Plane rows(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int t = -lead; t < window - lead; ++t) s += img.at_wrap(r, c - t);
            rows(r, c) = s * gain;
        }
    }
    Plane out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0;
            for (int t = -lead; t < window - lead; ++t) s += rows.at_wrap(r - t, c);
            out(r, c) = s * gain;
        }
    }
    return out;
}

}  // namespace fbmp
