#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "oracle_conv.hpp"
#include "torusperc/fft.hpp"
#include "torusperc/grid.hpp"
#include "torusperc/rng.hpp"

using namespace torusperc;

namespace {

std::vector<double> random_field(const TorusGrid& grid, std::uint64_t seed) {
  std::vector<double> v(grid.cell_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng::normal(seed, 99, 0, i);
  return v;
}

}  // namespace

TEST_CASE("forward-inverse round trip") {
  TorusGrid grid(2, 16, 8.0);
  const std::vector<double> x = random_field(grid, 1);
  std::vector<std::complex<double>> xc(x.begin(), x.end());
  const auto back = ifft(grid, fft(grid, xc));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(back[i].real() == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK(std::fabs(back[i].imag()) < 1e-12);
  }
}

TEST_CASE("round trip in three dimensions") {
  TorusGrid grid(3, 8, 4.0);
  const std::vector<double> x = random_field(grid, 2);
  const auto back = ifft_real(grid, fft_real(grid, x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("dc component is the plain sum") {
  TorusGrid grid(2, 8, 4.0);
  const std::vector<double> x = random_field(grid, 3);
  double sum = 0.0;
  for (double v : x) sum += v;
  const auto hat = fft_real(grid, x);
  CHECK(hat[0].real() == doctest::Approx(sum).epsilon(1e-12));
  CHECK(std::fabs(hat[0].imag()) < 1e-10);
}

TEST_CASE("convolution with a delta reproduces the input") {
  TorusGrid grid(2, 16, 8.0);
  const std::vector<double> b = random_field(grid, 4);
  std::vector<double> delta(grid.cell_count(), 0.0);
  delta[0] = 1.0;
  const auto out = circular_convolve(grid, delta, b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(out[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  // shifted delta translates the input
  std::vector<double> shifted(grid.cell_count(), 0.0);
  shifted[grid.index({1, 0, 0})] = 1.0;
  const auto moved = circular_convolve(grid, shifted, b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    auto c = grid.coords(i);
    c[0] = grid.wrap(c[0] - 1);
    CHECK(moved[i] == doctest::Approx(b[grid.index(c)]).epsilon(1e-11));
  }
}

TEST_CASE("fft convolution matches direct summation on random instances") {
  // the desk-scale version of the acceptance sweep: 10 random 16^2 pairs
  TorusGrid grid(2, 16, 8.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::vector<double> a = random_field(grid, 100 + s);
    const std::vector<double> b = random_field(grid, 200 + s);
    const auto fast = circular_convolve(grid, a, b);
    const auto slow = oracle::circular_convolve_direct(grid, a, b);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(std::fabs(fast[i] - slow[i]) < 1e-8);
    }
  }
}

TEST_CASE("convolution commutes bit for bit") {
  // the factorization shares one plan per shape, so the spectral product is
  // the same floating-point expression either way round
  TorusGrid grid(2, 32, 8.0);
  const std::vector<double> a = random_field(grid, 7);
  const std::vector<double> b = random_field(grid, 8);
  const auto ab = circular_convolve(grid, a, b);
  const auto ba = circular_convolve(grid, b, a);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(ab[i] == ba[i]);
  }
}

TEST_CASE("direct convolution in three dimensions") {
  TorusGrid grid(3, 4, 2.0);
  const std::vector<double> a = random_field(grid, 11);
  const std::vector<double> b = random_field(grid, 12);
  const auto fast = circular_convolve(grid, a, b);
  const auto slow = oracle::circular_convolve_direct(grid, a, b);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(std::fabs(fast[i] - slow[i]) < 1e-10);
  }
}
