#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/wavelet.hpp"

using namespace wavesim;

namespace {

std::vector<double> random_plane(std::mt19937_64& g, int h, int w) {
  std::vector<double> x(static_cast<std::size_t>(h) * w);
  for (double& v : x) v = oracle::uniform(g, -1.0, 1.0);
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double energy(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST_CASE("filters are orthonormal quadrature mirrors") {
  for (const auto& basis : {WaveletBasis::haar(), WaveletBasis::db2()}) {
    double norm = 0.0;
    double cross = 0.0;
    for (std::size_t k = 0; k < basis.lowpass.size(); ++k) {
      norm += basis.lowpass[k] * basis.lowpass[k];
      cross += basis.lowpass[k] * basis.highpass[k];
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(cross) < 1e-15);
  }
  CHECK(WaveletBasis::haar().lowpass.size() == 2);
  CHECK(WaveletBasis::db2().lowpass.size() == 4);
  CHECK(parse_basis("db2") == BasisName::db2);
  CHECK_THROWS_AS(parse_basis("db4"), UsageError);
}

TEST_CASE("2x2 Haar example") {
  const std::vector<double> x = {1, 2, 3, 4};
  const auto c = dwt2(x, 2, 2, WaveletBasis::haar(), 1);
  REQUIRE(c.values.size() == 4);
  CHECK(c.values[0] == doctest::Approx(5.0));
  CHECK(c.values[1] == doctest::Approx(-1.0));  // LH
  CHECK(c.values[2] == doctest::Approx(-2.0));  // HL
  CHECK(std::abs(c.values[3]) < 1e-15);         // HH
}

TEST_CASE("forward transform matches pointwise filter-bank evaluation") {
  auto g = oracle::rng(11);
  for (const auto& basis : {WaveletBasis::haar(), WaveletBasis::db2()}) {
    for (const auto& [h, w, levels] : {std::tuple{8, 8, 1}, std::tuple{8, 12, 2}, std::tuple{32, 32, 3}, std::tuple{28, 28, 2}}) {
      const auto x = random_plane(g, h, w);
      const auto got = dwt2(x, h, w, basis, levels);
      const auto want = oracle::dwt_direct(x, h, w, basis.lowpass, levels);
      CHECK(max_abs_diff(got.values, want) < 1e-12);
    }
  }
}

TEST_CASE("perfect reconstruction and Parseval over sizes and levels") {
  auto g = oracle::rng(12);
  for (const auto& basis : {WaveletBasis::haar(), WaveletBasis::db2()}) {
    for (int size : {4, 28, 32, 64}) {
      for (int levels : {1, 2, 3}) {
        const auto x = random_plane(g, size, size);
        const auto c = dwt2(x, size, size, basis, levels);
        CHECK(c.values.size() == x.size());
        CHECK(max_abs_diff(idwt2(c, basis), x) < 1e-10);
        CHECK(std::abs(energy(c.values) - energy(x)) / energy(x) < 1e-9);
      }
    }
  }
}

TEST_CASE("effective depth stops at odd dimensions") {
  CHECK(effective_levels(28, 28, 5) == 2);
  CHECK(effective_levels(32, 32, 3) == 3);
  CHECK(effective_levels(512, 662, 4) == 1);
  const std::vector<double> x(28 * 28, 0.5);
  CHECK(dwt2(x, 28, 28, WaveletBasis::haar(), 4).levels == 2);
}

TEST_CASE("constant image has no detail energy") {
  const std::vector<double> x(16 * 16, 0.7);
  for (const auto& basis : {WaveletBasis::haar(), WaveletBasis::db2()}) {
    const auto c = dwt2(x, 16, 16, basis, 2);
    for (int level = 1; level <= 2; ++level) {
      for (Subband band : {Subband::LH, Subband::HL, Subband::HH}) {
        for (double v : c.detail(level, band)) CHECK(std::abs(v) < 1e-12);
      }
    }
    for (double v : c.approximation()) CHECK(v == doctest::Approx(0.7 * 4.0));
  }
}

TEST_CASE("circular shift by 2^levels permutes each subband circularly") {
  auto g = oracle::rng(13);
  const int h = 16;
  const int w = 16;
  const int levels = 2;
  const int shift = 1 << levels;
  const auto x = random_plane(g, h, w);
  std::vector<double> shifted(x.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) shifted[static_cast<std::size_t>(r) * w + (c + shift) % w] = x[static_cast<std::size_t>(r) * w + c];
  }
  const auto basis = WaveletBasis::db2();
  const auto a = dwt2(x, h, w, basis, levels);
  const auto b = dwt2(shifted, h, w, basis, levels);
  for (int level = 1; level <= levels; ++level) {
    const int bh = a.band_height(level);
    const int bw = a.band_width(level);
    const int s = shift >> level;
    for (Subband band : {Subband::LH, Subband::HL, Subband::HH}) {
      const auto da = a.detail(level, band);
      const auto db = b.detail(level, band);
      for (int r = 0; r < bh; ++r) {
        for (int c = 0; c < bw; ++c) {
          CHECK(db[static_cast<std::size_t>(r) * bw + (c + s) % bw] == doctest::Approx(da[static_cast<std::size_t>(r) * bw + c]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("inverse of zero is zero; unit scaling coefficient round-trips") {
  WaveletCoefficients c;
  c.height = 8;
  c.width = 8;
  c.levels = 2;
  c.values.assign(64, 0.0);
  for (double v : idwt2(c, WaveletBasis::db2())) CHECK(v == 0.0);
  c.values[0] = 1.0;
  const auto patch = idwt2(c, WaveletBasis::db2());
  const auto back = dwt2(patch, 8, 8, WaveletBasis::db2(), 2);
  CHECK(back.values[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < back.values.size(); ++k) CHECK(std::abs(back.values[k]) < 1e-12);
}

TEST_CASE("errors: odd size, bad levels, mismatched shape") {
  const std::vector<double> odd(7 * 8, 0.0);
  CHECK_THROWS_WITH_AS(dwt2(odd, 7, 8, WaveletBasis::haar(), 1), doctest::Contains("pad or crop"), UsageError);
  const std::vector<double> x(16, 0.0);
  CHECK_THROWS_AS(dwt2(x, 4, 4, WaveletBasis::haar(), 0), UsageError);
  CHECK_THROWS_AS(dwt2(x, 4, 5, WaveletBasis::haar(), 1), UsageError);
  WaveletCoefficients bad;
  bad.height = 4;
  bad.width = 4;
  bad.levels = 3;
  bad.values.assign(16, 0.0);
  CHECK_THROWS_AS(idwt2(bad, WaveletBasis::haar()), UsageError);
}

TEST_CASE("decompose_dataset: shape, channel-major order, zero image") {
  auto g = oracle::rng(14);
  LabeledDataset data;
  data.class_names = {"a"};
  for (int i = 0; i < 3; ++i) {
    data.images.push_back(oracle::random_image(g, 8, 8, 3));
    data.labels.push_back(0);
    data.source_ids.push_back(std::to_string(i));
  }
  data.images.push_back(ImageTensor(8, 8, 3));
  data.labels.push_back(0);
  data.source_ids.push_back("zero");
  const auto m = decompose_dataset(data, BasisName::db2, 2);
  CHECK(m.values.rows() == 4);
  CHECK(m.values.cols() == 8 * 8 * 3);
  CHECK(m.image_ids == data.source_ids);
  CHECK(m.values.row(3).cwiseAbs().maxCoeff() == 0.0);
  const auto basis = WaveletBasis::db2();
  for (int c = 0; c < 3; ++c) {
    const auto plane = data.images[1].plane(c);
    const std::vector<double> p(plane.begin(), plane.end());
    const auto want = dwt2(p, 8, 8, basis, 2);
    for (int k = 0; k < 64; ++k) CHECK(m.values(1, c * 64 + k) == want.values[static_cast<std::size_t>(k)]);
  }
  data.images.push_back(ImageTensor(4, 4, 3));
  data.labels.push_back(0);
  data.source_ids.push_back("small");
  CHECK_THROWS_AS(decompose_dataset(data, BasisName::db2, 1), DataError);
}
