#include "toeplitz_hc/fft.hpp"

#include "toeplitz_hc/error.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace toeplitz_hc::fft {

namespace {

std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex *as_fftw(cplx *p) { return reinterpret_cast<fftw_complex *>(p); }
fftw_complex *as_fftw(const cplx *p) { return reinterpret_cast<fftw_complex *>(const_cast<cplx *>(p)); }

} // namespace

Plan::Plan(std::size_t n, Direction dir) : n_(n)
{
    THC_FAIL_IF(!is_pow2(n), ParamInvalid, "FFT size must be a power of two");
    std::vector<cplx> a(n), b(n);
    const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(a.data()), as_fftw(b.data()), sign,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    THC_FAIL_IF(plan_ == nullptr, ParamInvalid, "FFTW planning failed");
}

Plan::~Plan()
{
    if (plan_ != nullptr) {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

Plan::Plan(Plan &&other) noexcept : n_(other.n_), plan_(other.plan_) { other.plan_ = nullptr; }

Plan &Plan::operator=(Plan &&other) noexcept
{
    if (this != &other) {
        if (plan_ != nullptr) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(static_cast<fftw_plan>(plan_));
        }
        n_ = other.n_;
        plan_ = other.plan_;
        other.plan_ = nullptr;
    }
    return *this;
}

void Plan::execute(std::span<const cplx> in, std::span<cplx> out) const
{
    THC_FAIL_IF(in.size() != n_ || out.size() != n_, ParamInvalid, "FFT buffer size mismatch");
    if (in.data() == out.data()) {
        const std::vector<cplx> tmp(in.begin(), in.end());
        fftw_execute_dft(static_cast<fftw_plan>(plan_), as_fftw(tmp.data()), as_fftw(out.data()));
        return;
    }
    // Out-of-place complex plans preserve their input.
    fftw_execute_dft(static_cast<fftw_plan>(plan_), as_fftw(in.data()), as_fftw(out.data()));
}

void Plan::execute_inplace(std::span<cplx> data) const
{
    execute(data, data);
}

CVec forward(std::span<const cplx> x)
{
    CVec out(x.size());
    Plan(x.size(), Direction::Forward).execute(x, out);
    return out;
}

CVec backward(std::span<const cplx> x)
{
    CVec out(x.size());
    Plan(x.size(), Direction::Backward).execute(x, out);
    return out;
}

} // namespace toeplitz_hc::fft
