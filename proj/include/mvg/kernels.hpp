#pragma once

#include <cstddef>

#include "mvg/tensor.hpp"

namespace mvg::kern {

// Raw numeric kernels shared by the taped ops and the hand-written tangent
// propagation in motionspace. All deterministic: each output element is
// accumulated by exactly one thread in a fixed order, so results are
// bit-identical for any thread count.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad);
Tensor conv2d_dx(const Tensor& gy, const Tensor& w, int stride, int pad,
                 std::size_t h, std::size_t w_in);
Tensor conv2d_dw(const Tensor& x, const Tensor& gy, int stride, int pad,
                 std::size_t kh, std::size_t kw);

Tensor conv3d(const Tensor& x, const Tensor& w, const int stride[3], const int pad[3]);
Tensor conv3d_dx(const Tensor& gy, const Tensor& w, const int stride[3], const int pad[3],
                 std::size_t t, std::size_t h, std::size_t w_in);
Tensor conv3d_dw(const Tensor& x, const Tensor& gy, const int stride[3], const int pad[3],
                 std::size_t kt, std::size_t kh, std::size_t kw);

Tensor upsample2(const Tensor& x);
Tensor downsum2(const Tensor& x);

} // namespace mvg::kern
