// fft.cpp - FFTW plan cache; plans are created once per size and reused

#include "vnmeas/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace vnmeas::fft {

namespace {

// Planning is not thread-safe in FFTW; execution via fftw_execute_dft is.
// Plans are created with FFTW_UNALIGNED so they accept any buffer.
class PlanCache {
  public:
    fftw_plan get(int n, int sign) {
        std::scoped_lock lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::vector<Complex> dummy_in(n), dummy_out(n);
        fftw_plan p = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(dummy_in.data()),
            reinterpret_cast<fftw_complex*>(dummy_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fft: FFTW planning failed");
        plans_.emplace(key, p);
        return p;
    }

  private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

Vector run(const Vector& in, int sign) {
    const int n = static_cast<int>(in.size());
    if (n < 1) throw std::invalid_argument("fft: empty input");
    Vector out(n);
    Vector tmp = in; // fftw_execute_dft may clobber input for some plans
    fftw_plan p = cache().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

Vector forward(const Vector& in) { return run(in, FFTW_FORWARD); }
Vector backward(const Vector& in) { return run(in, FFTW_BACKWARD); }

} // namespace vnmeas::fft
