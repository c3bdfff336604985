#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbmp/errors.hpp"

namespace fbmp {

// A single real-valued image plane, row-major.
class Plane {
public:
    Plane() = default;

    Plane(int height, int width, double fill = 0.0)
        : height_(height), width_(width), data_(check_dims(height, width), fill) {}

    Plane(int height, int width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != check_dims(height, width))
            throw DimensionError("plane data length does not match height*width");
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(int r, int c) noexcept { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    double operator()(int r, int c) const noexcept { return data_[static_cast<std::size_t>(r) * width_ + c]; }

    // wrap-around access, used by the circular operators
    double at_wrap(int r, int c) const noexcept {
        r %= height_; if (r < 0) r += height_;
        c %= width_;  if (c < 0) c += width_;
        return (*this)(r, c);
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<const double> samples() const noexcept { return data_; }
    std::span<double> samples() noexcept { return data_; }

    bool same_shape(const Plane& o) const noexcept { return height_ == o.height_ && width_ == o.width_; }

    double sum() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }
    double mean() const noexcept { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }
    double min() const noexcept {
        double m = data_.empty() ? 0.0 : data_[0];
        for (double v : data_) m = std::min(m, v);
        return m;
    }
    double max() const noexcept {
        double m = data_.empty() ? 0.0 : data_[0];
        for (double v : data_) m = std::max(m, v);
        return m;
    }
    double norm() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }
    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Plane& operator+=(const Plane& o) { return zip(o, [](double a, double b) { return a + b; }); }
    Plane& operator-=(const Plane& o) { return zip(o, [](double a, double b) { return a - b; }); }
    Plane& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }
    Plane& operator+=(double s) noexcept {
        for (double& v : data_) v += s;
        return *this;
    }

    friend Plane operator+(Plane a, const Plane& b) { a += b; return a; }
    friend Plane operator-(Plane a, const Plane& b) { a -= b; return a; }
    friend Plane operator*(Plane a, double s) { a *= s; return a; }
    friend Plane operator*(double s, Plane a) { a *= s; return a; }

    friend double dot(const Plane& a, const Plane& b) {
        if (!a.same_shape(b)) throw DimensionError("dot: shape mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < a.data_.size(); ++i) s += a.data_[i] * b.data_[i];
        return s;
    }

private:
    template <class F>
    Plane& zip(const Plane& o, F f) {
        if (!same_shape(o)) throw DimensionError("plane arithmetic: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = f(data_[i], o.data_[i]);
        return *this;
    }

    static std::size_t check_dims(int h, int w) {
        if (h < 0 || w < 0) throw DimensionError("negative plane dimensions");
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Ordered stack of same-shape planes.
class MultiBandImage {
public:
    MultiBandImage() = default;

    explicit MultiBandImage(std::vector<Plane> bands) : bands_(std::move(bands)) {
        if (bands_.empty()) throw DimensionError("multi-band image needs at least one band");
        for (const Plane& b : bands_)
            if (!b.same_shape(bands_.front()))
                throw DimensionError("multi-band image: bands differ in shape");
    }

    MultiBandImage(int band_count, int height, int width)
        : MultiBandImage(std::vector<Plane>(band_count, Plane(height, width))) {}

    int band_count() const noexcept { return static_cast<int>(bands_.size()); }
    int height() const noexcept { return bands_.empty() ? 0 : bands_.front().height(); }
    int width() const noexcept { return bands_.empty() ? 0 : bands_.front().width(); }

    Plane& band(int i) { return bands_.at(i); }
    const Plane& band(int i) const { return bands_.at(i); }
    std::vector<Plane>& bands() noexcept { return bands_; }
    const std::vector<Plane>& bands() const noexcept { return bands_; }

private:
    std::vector<Plane> bands_;
};

// Odd-sized square blur kernel with its center tap at ((n-1)/2, (n-1)/2).
class Kernel2D {
public:
    Kernel2D() = default;

    explicit Kernel2D(int size, double fill = 0.0) : taps_(check_size(size), size, fill) {}

    Kernel2D(int size, std::vector<double> taps) : taps_(check_size(size), size, std::move(taps)) {}

    static Kernel2D dirac(int size) {
        Kernel2D k(size);
        k(k.center(), k.center()) = 1.0;
        return k;
    }

    int size() const noexcept { return taps_.width(); }
    int center() const noexcept { return (size() - 1) / 2; }

    double& operator()(int r, int c) noexcept { return taps_(r, c); }
    double operator()(int r, int c) const noexcept { return taps_(r, c); }

    const Plane& taps() const noexcept { return taps_; }
    Plane& taps() noexcept { return taps_; }

    double sum() const noexcept { return taps_.sum(); }
    double min() const noexcept { return taps_.min(); }

    void normalize() {
        double s = sum();
        if (std::abs(s) < 1e-300) throw NumericalError("kernel normalization: tap sum is zero");
        taps_ *= 1.0 / s;
    }

    bool in_simplex(double tol = 1e-9) const noexcept {
        return min() >= -tol && std::abs(sum() - 1.0) <= tol;
    }

private:
    static int check_size(int size) {
        if (size < 1 || size % 2 == 0) throw ParamError("kernel size must be odd and positive");
        return size;
    }

    Plane taps_;
};

}  // namespace fbmp
