//
//  fft.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/fft.hpp>
#include <classroom/errors.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

namespace classroom::dsp {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_array(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (p == nullptr) throw std::bad_alloc();
    return std::unique_ptr<T[], FftwFree>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {
        if (plan_ == nullptr) throw PipelineError("FFTW failed to create a plan");
    }
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

} // namespace

std::size_t fast_fft_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2u, 3u, 5u}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

std::vector<Complex> rfft(std::span<const double> x, std::size_t n) {
    if (n == 0) throw InvalidInput("rfft size must be positive");
    auto in = fftw_array<double>(n);
    auto out = fftw_array<fftw_complex>(n / 2 + 1);
    const std::size_t copied = std::min(n, x.size());
    std::copy_n(x.begin(), copied, in.get());
    std::fill(in.get() + copied, in.get() + n, 0.0);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = std::make_unique<Plan>(
            fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    plan->execute();
    std::vector<Complex> spectrum(n / 2 + 1);
    for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] = {out[k][0], out[k][1]};
    return spectrum;
}

std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n) {
    if (n == 0 || spectrum.size() != n / 2 + 1) throw InvalidInput("irfft spectrum size mismatch");
    auto in = fftw_array<fftw_complex>(spectrum.size());
    auto out = fftw_array<double>(n);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        // c2r destroys its input; plan before filling so FFTW_ESTIMATE leaves data alone
        plan = std::make_unique<Plan>(
            fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        in[k][0] = spectrum[k].real();
        in[k][1] = spectrum[k].imag();
    }
    plan->execute();
    std::vector<double> x(out.get(), out.get() + n);
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : x) v *= inv;
    return x;
}

} // namespace classroom::dsp
