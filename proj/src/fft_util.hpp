#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "fbmp/image.hpp"

namespace fbmp::detail {

// FFTW planning is not thread-safe; all plan creation/destruction goes
// through this mutex. Execution on distinct plans is safe concurrently.
std::mutex& fftw_plan_mutex();

// Complex 2-D DFT of a fixed shape with owned buffers. One instance per
// thread; execution on the same instance must not overlap.
class Fft2D {
public:
    Fft2D(int rows, int cols);
    ~Fft2D();

    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

    void forward(const double* in, std::complex<double>* out);
    void forward(const Plane& in, std::complex<double>* out) { forward(in.data(), out); }
    std::vector<std::complex<double>> forward(const Plane& in);

    // Inverse transform including the 1/(rows*cols) factor; imaginary parts
    // are dropped.
    void backward_real(const std::complex<double>* in, double* out);
    Plane backward_real(const std::complex<double>* in);

private:
    int rows_;
    int cols_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

// Circular convolution with a fixed kernel via its cached spectrum.
class SpectralConv {
public:
    SpectralConv(const Kernel2D& k, int rows, int cols);

    Plane apply(const Plane& img);
    Plane apply_adjoint(const Plane& img);

    const std::vector<std::complex<double>>& kernel_spectrum() const noexcept { return spectrum_; }

private:
    Fft2D fft_;
    std::vector<std::complex<double>> spectrum_;
    std::vector<std::complex<double>> work_;
};

}  // namespace fbmp::detail
