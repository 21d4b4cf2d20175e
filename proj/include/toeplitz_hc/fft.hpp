#pragma once

#include "toeplitz_hc/types.hpp"

#include <cstddef>
#include <memory>
#include <span>

namespace toeplitz_hc::fft {

enum class Direction { Forward, Backward };

/// Unnormalized complex DFT plan of a fixed power-of-two size (FFTW backed).
/// Execution on caller-provided buffers is thread-safe; only planning is
/// serialized internally.
class Plan {
public:
    Plan(std::size_t n, Direction dir);
    ~Plan();
    Plan(Plan &&) noexcept;
    Plan &operator=(Plan &&) noexcept;
    Plan(const Plan &) = delete;
    Plan &operator=(const Plan &) = delete;

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    void execute(std::span<const cplx> in, std::span<cplx> out) const;
    void execute_inplace(std::span<cplx> data) const;

private:
    std::size_t n_ = 0;
    void *plan_ = nullptr;
};

/// One-shot forward transform: X_k = sum_j x_j e^{-2 pi i jk/n}.
CVec forward(std::span<const cplx> x);
/// One-shot backward transform without the 1/n factor.
CVec backward(std::span<const cplx> x);

[[nodiscard]] constexpr bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

[[nodiscard]] constexpr std::size_t next_pow2(std::size_t n) noexcept
{
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

} // namespace toeplitz_hc::fft
