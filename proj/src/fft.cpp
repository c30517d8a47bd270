#include "dynfit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace dynfit::fft {

namespace {

// FFTW plan creation is not thread-safe; execution on caller buffers is.
// Plans are cached per (size, kind) and created with FFTW_UNALIGNED so they
// accept any caller buffer.
std::mutex plan_mutex;

fftw_plan c2c_plan(long n, int sign) {
    static std::map<std::pair<long, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<fftw_complex> in(static_cast<size_t>(n)), out(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in.data(), out.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[key] = p;
    return p;
}

fftw_plan r2c_plan(long n) {
    static std::map<long, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> in(static_cast<size_t>(n));
    std::vector<fftw_complex> out(static_cast<size_t>(n / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[n] = p;
    return p;
}

}  // namespace

CVec forward(const Vec& x) {
    const long n = x.size();
    CVec in(n), out(n);
    for (long i = 0; i < n; ++i) in[i] = std::complex<double>(x[i], 0.0);
    fftw_execute_dft(c2c_plan(n, FFTW_FORWARD),
                     reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

Vec inverse_real_part(const CVec& spectrum) {
    const long n = spectrum.size();
    CVec in = spectrum, out(n);
    fftw_execute_dft(c2c_plan(n, FFTW_BACKWARD),
                     reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Vec result(n);
    for (long i = 0; i < n; ++i) result[i] = out[i].real() / static_cast<double>(n);
    return result;
}

CVec forward_half(const Vec& x) {
    const long n = x.size();
    Vec in = x;
    CVec out(n / 2 + 1);
    fftw_execute_dft_r2c(r2c_plan(n), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

Vec power_spectrum(const Vec& x) {
    Vec centered = x.array() - x.mean();
    CVec half = forward_half(centered);
    const long nb = half.size() - 1;  // drop the (zero) DC bin
    Vec p(nb);
    for (long k = 0; k < nb; ++k) p[k] = std::norm(half[k + 1]);
    return p;
}

}  // namespace dynfit::fft
