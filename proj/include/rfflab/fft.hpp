#pragma once

#include "rfflab/common.hpp"

namespace rfflab {

/// Unitary forward DFT: X[k] = N^{-1/2} sum_n x[n] e^{-i 2 pi k n / N}.
CVector unitary_dft(const CVector& x);

/// Unitary inverse DFT, the exact inverse of unitary_dft.
CVector unitary_idft(const CVector& x);

/// Plain (unnormalized) N-point DFT of x zero-padded to N. Used for
/// channel frequency responses, where the taps must not be rescaled.
CVector frequency_response(const CVector& taps, Index n_points);

}  // namespace rfflab
