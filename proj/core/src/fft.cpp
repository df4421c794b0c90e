#include "torusperc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "torusperc/errors.hpp"

namespace torusperc {

namespace {

// FFTW planning is not thread safe, so plans are created under a lock and
// cached per (d, n, sign). Execution via fftw_execute_dft on fresh arrays is
// safe concurrently. FFTW_UNALIGNED because the new-array interface gives no
// alignment guarantee.
struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(int d, int n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(d, n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<int> dims(d, n);
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(n);
    std::vector<fftw_complex> scratch(total);
    fftw_plan p = fftw_plan_dft(d, dims.data(), scratch.data(), scratch.data(), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw Error("fft-plan", "fftw_plan_dft returned null");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::vector<std::complex<double>> transform(const TorusGrid& grid,
                                            const std::vector<std::complex<double>>& in, int sign) {
  if (in.size() != grid.cell_count())
    throw Error("grid-mismatch", "transform input length does not match grid");
  fftw_plan p = cache().get(grid.d, grid.n, sign);
  std::vector<std::complex<double>> out(in.size());
  // in-place style execute on a copy keeps the input const
  std::vector<std::complex<double>> work(in);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(work.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(const TorusGrid& grid,
                                      const std::vector<std::complex<double>>& in) {
  return transform(grid, in, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(const TorusGrid& grid,
                                       const std::vector<std::complex<double>>& in) {
  auto out = transform(grid, in, FFTW_BACKWARD);
  double scale = 1.0 / static_cast<double>(grid.cell_count());
  for (auto& z : out) z *= scale;
  return out;
}

std::vector<std::complex<double>> fft_real(const TorusGrid& grid, const std::vector<double>& in) {
  std::vector<std::complex<double>> cplx(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) cplx[i] = in[i];
  return fft(grid, cplx);
}

std::vector<double> ifft_real(const TorusGrid& grid, const std::vector<std::complex<double>>& in) {
  auto out = ifft(grid, in);
  std::vector<double> re(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
  return re;
}

std::vector<double> circular_convolve(const TorusGrid& grid, const std::vector<double>& a,
                                      const std::vector<double>& b) {
  if (a.size() != grid.cell_count() || b.size() != grid.cell_count())
    throw Error("grid-mismatch", "convolution operand length does not match grid");
  auto fa = fft_real(grid, a);
  auto fb = fft_real(grid, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return ifft_real(grid, fa);
}

}  // namespace torusperc
