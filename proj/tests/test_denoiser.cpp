#include "doctest.h"

#include "cinediff/denoiser.hpp"
#include "cinediff/schedule.hpp"
#include "support.hpp"

using namespace cinediff;

namespace {

Eigen::ArrayXXd normal_array(Index r, Index c, std::uint64_t seed) {
  auto rng = substream(seed, StreamTag::PosteriorNoise);
  Eigen::ArrayXXd a(r, c);
  fill_normal(a, rng);
  return a;
}

}  // namespace

TEST_CASE("oracle recovers the injected noise") {
  const RespacedSchedule r = respace(make_schedule(ScheduleKind::Cosine), 50);
  const Eigen::ArrayXXd x0 = Eigen::ArrayXXd::Random(5, 5);
  const Eigen::ArrayXXd eps = normal_array(5, 5, 1);
  for (int i : {1, 10, 50}) {
    const Eigen::ArrayXXd xi = q_sample(x0, i, eps, r);
    CHECK((oracle_predict(xi, x0, r.alpha_bar(i)) - eps).abs().maxCoeff() < 1e-6);
  }
  const Eigen::ArrayXXd clean = std::sqrt(r.alpha_bar(7)) * x0;
  CHECK(oracle_predict(clean, x0, r.alpha_bar(7)).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(oracle_predict(clean, x0, 1.0), std::domain_error);
}

TEST_CASE("gaussian prior closed form") {
  const double abar = 0.37;
  const Eigen::ArrayXXd x = normal_array(3, 4, 2);
  SUBCASE("broad prior predicts no noise") {
    const Eigen::ArrayXXd e = gaussian_prior_predict(x, 0.2, 1e6, abar);
    const Eigen::ArrayXXd x0_hat = (x - std::sqrt(1 - abar) * e) / std::sqrt(abar);
    CHECK((x0_hat - x / std::sqrt(abar)).abs().maxCoeff() < 1e-3);
  }
  SUBCASE("input at the scaled prior mean") {
    const double mu0 = 0.4;
    const Eigen::ArrayXXd xi = Eigen::ArrayXXd::Constant(2, 2, std::sqrt(abar) * mu0);
    const Eigen::ArrayXXd e = gaussian_prior_predict(xi, mu0, 0.3, abar);
    const Eigen::ArrayXXd x0_hat = (xi - std::sqrt(1 - abar) * e) / std::sqrt(abar);
    CHECK((x0_hat - mu0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("matches the oracle when the prior is a point mass") {
    const Eigen::ArrayXXd e = gaussian_prior_predict(x, 0.5, 1e-12, abar);
    CHECK((e - oracle_predict(x, Eigen::ArrayXXd::Constant(3, 4, 0.5), abar)).abs().maxCoeff() < 1e-9);
  }
  CHECK_THROWS_AS(gaussian_prior_predict(x, 0.0, 0.0, abar), std::invalid_argument);
  CHECK_THROWS_AS(GaussianPriorDenoiser(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("oracle denoiser picks truth frames and normalizes them") {
  const Cine truth = testing::random_cine(5, 4, 4, 9);
  const OracleDenoiser oracle(truth);
  const NormalizationRecord norm{0.8, 0.99};
  const std::vector<int> frames{4, 0, 1};
  Cine x0(3, 4, 4);
  for (int j = 0; j < 3; ++j) x0.data().row(j) = truth.data().row(frames[static_cast<std::size_t>(j)]);
  x0 = norm.forward(x0);
  const double abar = 0.6;
  const Cine eps(4, 4, normal_array(3, 16, 5));
  const Cine noisy(4, 4, std::sqrt(abar) * x0.data() + std::sqrt(1 - abar) * eps.data());
  const DenoiserInput in{noisy, noisy, 3, 60, abar, frames, &norm};
  CHECK((oracle.predict(in).data() - eps.data()).abs().maxCoeff() < 1e-10);

  const DenoiserInput missing{noisy, noisy, 3, 60, abar, {}, &norm};
  CHECK_THROWS_AS(oracle.predict(missing), std::invalid_argument);
}

TEST_CASE("passthrough denoiser targets the condition") {
  const Cine cond = testing::random_cine(2, 3, 3, 1);
  const Cine eps(3, 3, normal_array(2, 9, 6));
  const double abar = 0.25;
  const Cine noisy(3, 3, 0.5 * cond.data() + std::sqrt(0.75) * eps.data());
  const DenoiserInput in{noisy, cond, 1, 20, abar};
  CHECK((PassthroughDenoiser().predict(in).data() - eps.data()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("tinycondnet layer table") {
  const auto t = tinycondnet::layer_table(3);
  CHECK(t.front().name == "stem.weight");
  CHECK(t.front().shape == std::vector<std::int64_t>{32, 6, 3, 3});
  CHECK(t.back().name == "head.bias");
  CHECK(t.size() == 6 + 3 * 6 + 2);
  // 1728 + 32 + 2048 + 64 + 4096 + 64 + 3 * (9216 + 32 + 2048 + 32 + 9216 + 32) + 864 + 3
  CHECK(tinycondnet::parameter_count(3) == 70627);
  CHECK_THROWS_AS(tinycondnet::layer_table(0), std::invalid_argument);
}

TEST_CASE("sinusoidal embedding layout") {
  const Eigen::ArrayXf e = tinycondnet::sinusoidal_embedding(5.0);
  CHECK(e.size() == 32);
  CHECK(e[0] == doctest::Approx(std::sin(5.0)));
  CHECK(e[16] == doctest::Approx(std::cos(5.0)));
  CHECK(e[3] == doctest::Approx(std::sin(5.0 * std::pow(10000.0, -6.0 / 32))));
  CHECK(e[19] == doctest::Approx(std::cos(5.0 * std::pow(10000.0, -6.0 / 32))));
}

TEST_CASE("zero weights give a zero output") {
  const TinyCondNet net(tinycondnet::zero_weights(3), 3);
  const Eigen::MatrixXf in = Eigen::MatrixXf::Random(6, 64);
  CHECK(net.forward(in, 8, 8, 123).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("tinycondnet is translation equivariant away from the border") {
  const TinyCondNet net(tinycondnet::random_weights(3, 4), 3);
  const Index n = 32;
  const Eigen::MatrixXf in = Eigen::MatrixXf::Random(6, n * n);
  Eigen::MatrixXf shifted = Eigen::MatrixXf::Zero(6, n * n);
  for (Index r = 2; r < n; ++r) shifted.middleCols((r) * n, n) = in.middleCols((r - 2) * n, n);
  const Eigen::MatrixXf a = net.forward(in, n, n, 200);
  const Eigen::MatrixXf b = net.forward(shifted, n, n, 200);
  // receptive radius is 8 convolutions deep
  float worst = 0.0f;
  for (Index r = 12; r < n - 10; ++r) {
    for (Index c = 10; c < n - 10; ++c) {
      worst = std::max(worst, (b.col(r * n + c) - a.col((r - 2) * n + c)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-4f);
  CHECK(a.cwiseAbs().maxCoeff() > 1e-3f);
}

TEST_CASE("tinycondnet predict matches forward") {
  const TinyCondNet net(tinycondnet::random_weights(3, 8), 3);
  const Cine noisy = testing::random_cine(3, 6, 6, 1, -1, 1);
  const Cine cond = testing::random_cine(3, 6, 6, 2, -1, 1);
  const DenoiserInput in{noisy, cond, 5, 100, 0.5};
  Eigen::MatrixXf m(6, 36);
  m.topRows(3) = noisy.data().matrix().cast<float>();
  m.bottomRows(3) = cond.data().matrix().cast<float>();
  const Eigen::MatrixXf ref = net.forward(m, 6, 6, 100);
  CHECK((net.predict(in).data().matrix().cast<float>() - ref).cwiseAbs().maxCoeff() == 0.0f);
  // timestep matters
  CHECK((net.forward(m, 6, 6, 900) - ref).cwiseAbs().maxCoeff() > 1e-6f);

  const Cine two(2, 6, 6);
  const DenoiserInput wrong{two, two, 5, 100, 0.5};
  CHECK_THROWS_AS(net.predict(wrong), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(m, 5, 6, 1), std::invalid_argument);
}

TEST_CASE("tinycondnet rejects incomplete weights") {
  auto w = tinycondnet::random_weights(3, 1);
  w.erase("b2.time_proj.bias");
  CHECK_THROWS_AS(TinyCondNet(w, 3), tensorio::WeightsError);
  CHECK_THROWS_AS(TinyCondNet(tinycondnet::random_weights(3, 1), 2), tensorio::WeightsError);
  auto bad = tinycondnet::random_weights(3, 1);
  bad["head.weight"].values[0] = std::numeric_limits<float>::infinity();
  const TinyCondNet net(bad, 3);
  CHECK_THROWS_AS(net.forward(Eigen::MatrixXf::Ones(6, 16), 4, 4, 1), std::runtime_error);
}
