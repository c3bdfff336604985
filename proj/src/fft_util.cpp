#include "fft_util.hpp"

#include "fbmp/ops.hpp"

namespace fbmp::detail {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

Fft2D::Fft2D(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw DimensionError("Fft2D: empty grid");
    const std::size_t n = size();
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    if (!in_ || !out_) throw std::bad_alloc();
    fwd_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(rows, cols, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(out_);
}

void Fft2D::forward(const double* in, std::complex<double>* out) {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        in_[i][0] = in[i];
        in_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < n; ++i) out[i] = {out_[i][0], out_[i][1]};
}

std::vector<std::complex<double>> Fft2D::forward(const Plane& in) {
    std::vector<std::complex<double>> out(size());
    forward(in.data(), out.data());
    return out;
}

void Fft2D::backward_real(const std::complex<double>* in, double* out) {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        in_[i][0] = in[i].real();
        in_[i][1] = in[i].imag();
    }
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = out_[i][0] * scale;
}

Plane Fft2D::backward_real(const std::complex<double>* in) {
    Plane p(rows_, cols_);
    backward_real(in, p.data());
    return p;
}

SpectralConv::SpectralConv(const Kernel2D& k, int rows, int cols)
    : fft_(rows, cols), work_(fft_.size()) {
    if (k.size() > rows || k.size() > cols)
        throw DimensionError("kernel larger than image");
    spectrum_ = fft_.forward(embed_kernel(k, rows, cols));
}

Plane SpectralConv::apply(const Plane& img) {
    if (img.height() != fft_.rows() || img.width() != fft_.cols())
        throw DimensionError("SpectralConv: image shape mismatch");
    fft_.forward(img, work_.data());
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= spectrum_[i];
    return fft_.backward_real(work_.data());
}

Plane SpectralConv::apply_adjoint(const Plane& img) {
    if (img.height() != fft_.rows() || img.width() != fft_.cols())
        throw DimensionError("SpectralConv: image shape mismatch");
    fft_.forward(img, work_.data());
    for (std::size_t i = 0; i < work_.size(); ++i) work_[i] *= std::conj(spectrum_[i]);
    return fft_.backward_real(work_.data());
}

}  // namespace fbmp::detail
