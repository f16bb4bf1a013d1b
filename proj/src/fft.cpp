#include "maxreg/fft.hpp"

#include "maxreg/errors.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace maxreg::fft {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        std::lock_guard lock(mutex_);
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, std::size_t batch, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(n, batch, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        auto* scratch = fftw_alloc_complex(n * batch);
        const int len = static_cast<int>(n);
        const int stride = static_cast<int>(batch);
        fftw_plan plan = fftw_plan_many_dft(1, &len, stride,
                                            scratch, nullptr, stride, 1,
                                            scratch, nullptr, stride, 1,
                                            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (plan == nullptr) throw Error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(std::span<cplx> data, std::size_t n, std::size_t batch, int sign) {
    if (data.size() != n * batch) throw ValidationError("fft: buffer size does not match n * batch");
    if (n == 0 || batch == 0) return;
    fftw_plan plan = cache().get(n, batch, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

} // namespace

void forward(std::span<cplx> data, std::size_t n, std::size_t batch) {
    execute(data, n, batch, FFTW_FORWARD);
}

void backward(std::span<cplx> data, std::size_t n, std::size_t batch) {
    execute(data, n, batch, FFTW_BACKWARD);
}

} // namespace maxreg::fft
