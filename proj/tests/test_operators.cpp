#include "doctest.h"

#include "cinediff/operators.hpp"
#include "cinediff/phantom.hpp"
#include "support.hpp"

using namespace cinediff;

TEST_CASE("constant image transforms to a single DC bin") {
  const double v = 0.7;
  const RealImage img = RealImage::Constant(12, 10, v);
  const ComplexImage k = fft2c(img);
  CHECK(std::abs(k(6, 5) - cdouble(v * std::sqrt(120.0))) < 1e-12);
  ComplexImage rest = k;
  rest(6, 5) = 0.0;
  CHECK(rest.abs().maxCoeff() < 1e-12);
}

TEST_CASE("fft2c agrees with direct summation") {
  for (auto [h, w] : {std::pair<Index, Index>{8, 8}, {6, 10}, {7, 5}}) {
    const ComplexImage x = testing::random_complex(h, w, 17);
    CHECK((fft2c(x) - testing::direct_dft2c(x)).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fft2c round trip and Parseval") {
  const ComplexImage x = testing::random_complex(32, 32, 3);
  const ComplexImage k = fft2c(x);
  CHECK((ifft2c(k) - x).abs().maxCoeff() < 1e-6);
  CHECK(k.abs2().sum() == doctest::Approx(x.abs2().sum()).epsilon(1e-6));
}

TEST_CASE("fft2c accepts real expressions and volume stacks") {
  const Cine v = testing::random_cine(3, 8, 8, 2);
  const ComplexImage k1 = fft2c(v.frame(1));
  const ComplexImage k2 = fft2c(RealImage(v.frame(1) * 1.0));
  CHECK((k1 - k2).abs().maxCoeff() == 0.0);
  const ComplexVolume stack = fft2c(v.cast<cdouble>());
  CHECK((stack.frame(1) - k1).abs().maxCoeff() < 1e-14);
  CHECK((ifft2c(stack).data() - v.cast<cdouble>().data()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("rss_combine") {
  ComplexVolume one(1, 2, 2);
  one.data() << cdouble(3, 4), cdouble(-1, 0), cdouble(0, 0), cdouble(0, -2);
  const RealImage r1 = rss_combine(one);
  CHECK(r1(0, 0) == doctest::Approx(5.0));
  CHECK(r1(1, 1) == doctest::Approx(2.0));

  ComplexVolume two(2, 1, 1);
  two.data() << cdouble(3, 0), cdouble(0, 4);
  CHECK(rss_combine(two)(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("rss of coil images recovers the magnitude with normalized maps") {
  PhantomConfig cfg;
  cfg.rows = cfg.cols = 32;
  cfg.phases = 3;
  const Cine gt = generate_phantom(cfg);
  const ComplexVolume maps = generate_coils(32, 32, 6, 9);
  const KSpaceData k = simulate_kspace(gt, maps, SamplingMask::full(3, 32), 0.0, 1);
  for (Index t = 0; t < 3; ++t) {
    ComplexVolume imgs(6, 32, 32);
    for (Index c = 0; c < 6; ++c) imgs.frame(c) = ifft2c(k.coils[static_cast<std::size_t>(c)].frame(t));
    CHECK((rss_combine(imgs) - gt.frame(t)).abs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("pseudo_dc with a full mask returns the condition") {
  const Cine enh = testing::random_cine(2, 8, 8, 1);
  const Cine dl = testing::random_cine(2, 8, 8, 2);
  CHECK((pseudo_dc(enh, dl, SamplingMask::full(2, 8)).data() - dl.data()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("pseudo_dc with an empty mask returns the enhanced video") {
  const Cine enh = testing::random_cine(2, 8, 8, 1);
  const Cine dl = testing::random_cine(2, 8, 8, 2);
  const SamplingMask none(SamplingMask::Pattern::Constant(2, 8, false), 8, 0, MaskScheme::Lattice);
  CHECK((pseudo_dc(enh, dl, none).data() - enh.data()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("pseudo_dc keeps sampled lines of the condition before projection") {
  const Cine enh = testing::random_cine(4, 16, 16, 5);
  const Cine dl = testing::random_cine(4, 16, 16, 6);
  const SamplingMask mask = generate_mask(4, 16, 4, 2);
  const ComplexVolume pre = pseudo_dc_complex(enh, dl, mask);
  for (Index t = 0; t < 4; ++t) {
    const ComplexImage k = fft2c(pre.frame(t));
    const ComplexImage d = fft2c(dl.frame(t));
    const ComplexImage e = fft2c(enh.frame(t));
    for (Index l = 0; l < 16; ++l) {
      const double scale = d.row(l).abs().maxCoeff() + 1e-30;
      if (mask.sampled(t, l)) {
        CHECK((k.row(l) - d.row(l)).abs().maxCoeff() / scale < 1e-5);
      } else {
        CHECK((k.row(l) - e.row(l)).abs().maxCoeff() < 1e-10);
      }
    }
  }
  const Cine out = pseudo_dc(enh, dl, mask);
  CHECK(out.data().minCoeff() >= 0.0);
  CHECK((out.data() - pre.data().real().max(0.0)).abs().maxCoeff() == 0.0);
}

TEST_CASE("operator shape errors") {
  const Cine a(2, 8, 8), b(2, 8, 6);
  CHECK_THROWS_AS(pseudo_dc(a, b, SamplingMask::full(2, 8)), std::invalid_argument);
  CHECK_THROWS_AS(pseudo_dc(a, a, SamplingMask::full(3, 8)), std::invalid_argument);
  ComplexVolume k(2, 8, 8);
  CHECK_THROWS_AS(apply_mask(k, SamplingMask::full(2, 6)), std::invalid_argument);
}
