#pragma once

#include <complex>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace cbf::fft {

/// Round up to the next even size with prime factors {2,3,5} only.
/// FFTW handles arbitrary sizes, but smooth sizes keep transforms fast.
inline int smooth_size(int n) {
    auto is_smooth = [](int m) {
        for (int p : {2, 3, 5})
            while (m % p == 0) m /= p;
        return m == 1;
    };
    if (n < 2) return 2;
    int m = n + (n % 2);
    while (!is_smooth(m)) m += 2;
    return m;
}

namespace detail {

struct PlanKey {
    int dim;
    int m;
    int sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(dim, m, sign) < std::tie(o.dim, o.m, o.sign);
    }
};

// Plan creation is serialized (the FFTW planner is not thread-safe);
// execution on distinct arrays is safe without locking.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int dim, int m, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        PlanKey key{dim, m, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t total = 1;
        for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(m);
        std::vector<std::complex<double>> scratch(total);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        int dims[3] = {m, m, m};
        // FFTW_UNALIGNED lets the plan execute on any caller-provided buffer.
        fftw_plan plan = fftw_plan_dft(dim, dims, buf, buf, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw_plan_dft failed");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

  private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace detail

/// In-place complex DFT on an m^dim cube, row-major.
/// sign = FFTW_FORWARD (-1) or FFTW_BACKWARD (+1); no normalization applied.
inline void c2c(std::complex<double>* data, int dim, int m, int sign) {
    fftw_plan plan = detail::PlanCache::instance().get(dim, m, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace cbf::fft
