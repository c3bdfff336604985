#pragma once

#include "fbmp/image.hpp"

namespace fbmp {

// 2-D circular convolution, kernel center tap aligned to the origin so a
// centered Dirac is the identity. Frequency-domain implementation.
Plane circular_convolve(const Plane& img, const Kernel2D& k);

// Adjoint of circular_convolve with the same kernel (circular correlation).
Plane circular_convolve_adjoint(const Plane& img, const Kernel2D& k);

// Embeds the kernel in an h x w plane with its center tap at (0,0) and the
// remaining taps wrapped (PSF-to-transfer-function convention).
Plane embed_kernel(const Kernel2D& k, int height, int width);

// Keeps samples at (c*i, c*j); dimensions must divide by c.
Plane downsample(const Plane& img, int factor);

// Transpose of downsample: places samples at (c*i, c*j), zeros elsewhere.
Plane upsample_adjoint(const Plane& img, int factor);

enum class DiffOp { grad_h, grad_v, laplacian };

// Circular finite differences. grad_h/grad_v are forward differences with
// wrap; laplacian is circular convolution with the 5-point stencil
// [[0,-1,0],[-1,4,-1],[0,-1,0]].
Plane diff_operator(const Plane& img, DiffOp which);
Plane diff_adjoint(const Plane& img, DiffOp which);

// Per-pixel mean over the (2r+1)x(2r+1) window clamped to the image.
Plane box_mean(const Plane& img, int radius);

// Circular unit-gain box blur with an arbitrary window size (anchor at
// floor((window-1)/2) from the leading tap). Used by the spectral-weight
// solver where windows are (l+1) and (c*l+1).
Plane circular_box_blur(const Plane& img, int window);

}  // namespace fbmp
