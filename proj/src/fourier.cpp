#include "fourier.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace ffthom::detail {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

using PlanKey = std::tuple<int, int, int, int, int>;  // dim, n0, n1, n2, sign

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is. Plans are created once per grid shape and kept for the process.
class PlanCache {
 public:
  fftw_plan get(const GridSpec& grid, int sign) {
    const PlanKey key{grid.dim(), grid.size(0), grid.size(1),
                      grid.dim() > 2 ? grid.size(2) : 1, sign};
    std::lock_guard lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second.get();

    const int d = grid.dim();
    int n[3];
    for (int a = 0; a < d; ++a) n[a] = grid.size(a);
    const int dist = static_cast<int>(grid.num_nodes());
    auto* scratch = fftw_alloc_complex(grid.num_dofs());
    fftw_plan plan = fftw_plan_many_dft(d, n, d, scratch, nullptr, 1, dist, scratch, nullptr,
                                        1, dist, sign, FFTW_ESTIMATE);
    fftw_free(scratch);
    auto [pos, inserted] = plans_.emplace(key, PlanHandle(plan));
    return pos->second.get();
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, PlanHandle> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(const GridSpec& grid, std::span<Complex> data, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cache().get(grid, sign), ptr, ptr);
}

}  // namespace

void fft_forward_inplace(const GridSpec& grid, std::span<Complex> data) {
  execute(grid, data, FFTW_FORWARD);
}

void fft_backward_inplace(const GridSpec& grid, std::span<Complex> data) {
  execute(grid, data, FFTW_BACKWARD);
}

}  // namespace ffthom::detail
