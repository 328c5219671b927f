#include "doctest.h"

#include "cinediff/metrics.hpp"
#include "support.hpp"

#include <fstream>

using namespace cinediff;

TEST_CASE("psnr") {
  const Cine x = testing::random_cine(3, 8, 8, 1);
  CHECK(psnr(x, x) == kPsnrCap);
  Cine y = x;
  y.data() += 0.1;
  CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr(x, y, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)));
  CHECK_THROWS_AS(psnr(x, Cine(3, 8, 7)), std::invalid_argument);
  CHECK_THROWS_AS(psnr(x, y, 0.0), std::invalid_argument);
}

TEST_CASE("ssim") {
  const Cine x = testing::random_cine(2, 16, 16, 2);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-9));
  Cine y = x;
  y.data() += 0.2 * testing::random_cine(2, 16, 16, 3).data();
  const double s = ssim(x, y);
  CHECK(s < 1.0);
  CHECK(s > 0.0);
  CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)));
  CHECK_THROWS_AS(ssim(RealImage(4, 4), RealImage(4, 5)), std::invalid_argument);
}

TEST_CASE("ssim of a constant offset") {
  // Mean term only: (2 mu (mu + d) + C1) / (mu^2 + (mu + d)^2 + C1) with zero variance.
  const RealImage a = RealImage::Constant(12, 12, 0.5);
  const RealImage b = RealImage::Constant(12, 12, 0.6);
  const double c1 = 1e-4;
  CHECK(ssim(a, b) == doctest::Approx((2 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1)).epsilon(1e-12));
}

TEST_CASE("temporal gradient energy") {
  Cine v(3, 2, 2);
  v.frame(1).setConstant(1.0);
  v.frame(2).setConstant(3.0);
  CHECK(temporal_gradient_energy(v) == doctest::Approx(1.5));
  v.frame(2)(0, 0) = 1.0;
  CHECK(temporal_gradient_energy(v, Roi{0, 0, 1, 1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(temporal_gradient_energy(v, Roi{1, 1, 2, 2}), std::out_of_range);
  CHECK_THROWS_AS(temporal_gradient_energy(Cine(1, 2, 2)), std::invalid_argument);
}

TEST_CASE("temporal profiles") {
  PhantomConfig cfg;
  cfg.amplitude = 0.0;
  cfg.phases = 5;
  const Cine still = generate_phantom(cfg);
  const RealImage p = temporal_profile(still, 30);
  CHECK(p.rows() == 5);
  CHECK(p.cols() == 64);
  for (Index t = 1; t < 5; ++t) CHECK((p.row(t) == p.row(0)).all());
  CHECK_THROWS_AS(temporal_profile(still, 64), std::out_of_range);
}

TEST_CASE("moving profile edge oscillates with the heart period") {
  PhantomConfig cfg;
  cfg.phases = 20;
  const Cine v = generate_phantom(cfg);
  const PhantomGeometry g = phantom_geometry(cfg);
  const Index row = static_cast<Index>(std::lround(g.heart_row));
  const RealImage p = temporal_profile(v, row);
  // blood-pool width along the profile row, per frame
  Eigen::ArrayXd width(cfg.phases);
  for (Index t = 0; t < cfg.phases; ++t) width[t] = (p.row(t) > 0.5).count();
  CHECK(width[cfg.phases / 2] == width.minCoeff());
  CHECK(width[0] == width.maxCoeff());
  for (Index t = 1; t < cfg.phases; ++t) CHECK(width[t] == width[cfg.phases - t]);
  CHECK(width[0] - width[10] >= 2.0 * g.inner_radius * cfg.amplitude - 2.0);
}

TEST_CASE("profile image writers") {
  testing::TempDir dir("metrics");
  RealImage img(2, 3);
  img << 0.0, 0.5, 1.0, -1.0, 2.0, 0.25;
  write_pgm(dir / "p.pgm", img, 0.0, 1.0);
  std::ifstream in(dir / "p.pgm", std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  std::vector<unsigned char> px(6);
  in.read(reinterpret_cast<char*>(px.data()), 6);
  CHECK(magic == "P5");
  CHECK(w == 3);
  CHECK(h == 2);
  CHECK(px == std::vector<unsigned char>{0, 128, 255, 0, 255, 64});
  CHECK_THROWS_AS(write_pgm(dir / "q.pgm", img, 1.0, 1.0), std::invalid_argument);

  write_csv(dir / "p.csv", img);
  std::ifstream csv(dir / "p.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "0,0.5,1");
}

TEST_CASE("line fit") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const std::vector<double> noisy{3, 6, 6, 9};
  CHECK(fit_line(x, noisy).r_squared < 1.0);
  CHECK_THROWS_AS(fit_line(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("bench call counts") {
  const Cine dl = testing::random_cine(25, 8, 8, 4, 0.1, 1.0);
  const SamplingMask mask = generate_mask(25, 8, 4, 0);
  const PassthroughDenoiser d;
  const std::vector<BenchConfig> cfgs{{"s10", 3, 10, 50}, {"s50", 3, 50, 50}, {"naive", 1, 1000, 1000}};
  const auto reps = bench(dl, mask, cfgs, EnhanceConfig{}, d, 2);
  REQUIRE(reps.size() == 3);
  CHECK(reps[0].nfe == 90);
  CHECK(reps[1].nfe == 450);
  CHECK(reps[1].nfe == 5 * reps[0].nfe);
  CHECK(reps[2].nfe == 25000);
  CHECK(static_cast<double>(reps[2].nfe) / reps[0].nfe == doctest::Approx(277.78).epsilon(1e-4));
  CHECK(reps[0].calls_per_image == doctest::Approx(3.6));
  CHECK(reps[0].wall_samples.size() == 2);
  CHECK_THROWS_AS(bench(dl, mask, cfgs, EnhanceConfig{}, d, 0), std::invalid_argument);
}
