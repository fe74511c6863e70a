#include "scout/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"

using namespace scout;

namespace {

KernelParams iso_params(int dim, double sf2, double ell, double sn2) {
  KernelParams p;
  p.signal_variance = sf2;
  p.lengthscales = Eigen::VectorXd::Constant(dim, ell);
  p.noise_variance = sn2;
  return p;
}

GpModel random_model(int n, int dim, Rng& rng, double ell = 0.25, double sn2 = 1e-2) {
  Dataset d = Dataset::empty(dim);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(dim);
    x[0] = rng.uniform();
    x[1] = rng.uniform();
    if (dim == 3) x[2] = rng.uniform(0.0, 2.0);
    d.append(x, rng.normal());
  }
  return GpModel(iso_params(dim, 1.0 + rng.uniform(), ell, sn2), d);
}

LikelihoodWeight make_weight(const GpModel& m, const InputPrior& prior, Rng& rng, double t = 0.0) {
  return refresh_weight(m, prior, t, WeightConfig{}, rng);
}

int argmax_index(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("US equals posterior variance") {
  Rng rng(1);
  GpModel m = random_model(12, 2, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  AcquisitionEvaluator us(AcquisitionKind::US, ctx);
  for (int i = 0; i < 100; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    CHECK(us.value(z) == m.posterior_var(z));
    CHECK(us.cost(z) == -us.value(z));
  }
  GpModel empty = GpModel::prior(iso_params(2, 1.7, 0.3, 1e-3));
  AcquisitionContext ectx;
  ectx.model = &empty;
  CHECK(acq_us(ectx, Vec2(0.3, 0.8)) == doctest::Approx(1.7));
  // near-zero at a noiseless training point
  Dataset d = Dataset::empty(2);
  d.append(Vec2(0.5, 0.5), 1.0);
  GpModel noiseless(iso_params(2, 1.0, 0.3, 0.0), d);
  AcquisitionContext nctx;
  nctx.model = &noiseless;
  CHECK(acq_us(nctx, Vec2(0.5, 0.5)) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("uniform prior makes US-IW proportional to US") {
  Rng rng(3);
  GpModel m = random_model(15, 2, rng);
  InputPrior prior = InputPrior::uniform();
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  std::vector<double> us, usiw;
  for (int i = 0; i < 50; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    us.push_back(acq_us(ctx, z));
    usiw.push_back(acq_us_weighted(ctx, z, WeightMode::InputPrior));
  }
  CHECK(argmax_index(us) == argmax_index(usiw));
  for (int i = 0; i < 50; ++i) CHECK(usiw[i] == doctest::Approx(us[i]).epsilon(1e-12));
}

TEST_CASE("US-LW with constant mean ranks like US-IW") {
  GpModel m(iso_params(2, 1.0, 0.3, 1e-3), Dataset::empty(2), 3.0);
  Rng rng(5);
  InputPrior prior = InputPrior::gaussian(Vec2(0.5, 0.5), 0.01 * Eigen::Matrix2d::Identity());
  LikelihoodWeight lw = make_weight(m, prior, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.weight = &lw;
  std::vector<double> lws, iws;
  std::vector<Vec2> zs;
  for (int i = 0; i < 50; ++i) zs.emplace_back(rng.uniform(), rng.uniform());
  for (const auto& z : zs) {
    lws.push_back(acq_us_weighted(ctx, z, WeightMode::LikelihoodRatio));
    iws.push_back(acq_us_weighted(ctx, z, WeightMode::InputPrior));
  }
  // constant p_mu factor: identical ranking
  std::vector<int> rank_lw(zs.size()), rank_iw(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) rank_lw[i] = rank_iw[i] = static_cast<int>(i);
  std::sort(rank_lw.begin(), rank_lw.end(), [&](int a, int b) { return lws[a] < lws[b]; });
  std::sort(rank_iw.begin(), rank_iw.end(), [&](int a, int b) { return iws[a] < iws[b]; });
  CHECK(rank_lw == rank_iw);
}

TEST_CASE("US-IW two-point ratio identity") {
  Rng rng(7);
  GpModel m = random_model(10, 2, rng);
  InputPrior prior = InputPrior::gaussian(Vec2(0.5, 0.5), 0.01 * Eigen::Matrix2d::Identity());
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  const Vec2 a(0.5, 0.5), b(0.9, 0.9);
  const double lhs = acq_us_weighted(ctx, a, WeightMode::InputPrior) /
                     acq_us_weighted(ctx, b, WeightMode::InputPrior);
  const double rhs = (prior.density(a) / prior.density(b)) *
                     (m.posterior_var(a) / m.posterior_var(b));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("missing weight raises a configuration error") {
  Rng rng(9);
  GpModel m = random_model(5, 2, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  CHECK_THROWS_AS(AcquisitionEvaluator(AcquisitionKind::USLW, ctx), ConfigError);
  CHECK_THROWS_AS(AcquisitionEvaluator(AcquisitionKind::IVRIW, ctx), ConfigError);
}

TEST_CASE("IVR on the empty model matches the closed form") {
  const double sf2 = 1.4, ell = 0.23;
  GpModel m = GpModel::prior(iso_params(2, sf2, ell, 1e-3));
  AcquisitionContext ctx;
  ctx.model = &m;
  const Vec2 x(0.5, 0.5);
  // (1/sf2) * Int k^2 = sf2 * prod_d sqrt(pi) l/2 * [erf((1-c)/l) + erf(c/l)]
  double expect = sf2;
  for (int d = 0; d < 2; ++d) {
    expect *= std::sqrt(kPi) * ell * 0.5 * (std::erf((1.0 - x[d]) / ell) + std::erf(x[d] / ell));
  }
  CHECK(acq_ivr(ctx, x, QuadratureSpec{512}) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("IVR is nonnegative and converges under quadrature refinement") {
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    GpModel m = random_model(10 + 5 * trial, 2, rng, /*ell=*/0.4);
    AcquisitionContext ctx;
    ctx.model = &m;
    std::vector<Vec2> zs;
    for (int i = 0; i < 5; ++i) zs.emplace_back(rng.uniform(), rng.uniform());
    double scale = 0.0;
    std::vector<double> coarse(zs.size()), fine(zs.size());
    for (size_t i = 0; i < zs.size(); ++i) {
      coarse[i] = acq_ivr(ctx, zs[i], QuadratureSpec{256});
      fine[i] = acq_ivr(ctx, zs[i], QuadratureSpec{512});
      CHECK(coarse[i] >= 0.0);
      scale = std::max(scale, std::abs(fine[i]));
    }
    // doubling the resolution moves values by < 1e-4 of the acquisition scale
    for (size_t i = 0; i < zs.size(); ++i) CHECK(std::abs(coarse[i] - fine[i]) <= 1e-4 * scale);
  }
}

TEST_CASE("IVR at an explained point is (numerically) zero") {
  Dataset d = Dataset::empty(2);
  d.append(Vec2(0.5, 0.5), 0.3);
  GpModel m(iso_params(2, 1.0, 0.3, 0.0), d);
  AcquisitionContext ctx;
  ctx.model = &m;
  CHECK(acq_ivr(ctx, Vec2(0.5, 0.5), QuadratureSpec{32}) <= 1e-8);
}

TEST_CASE("IVR-LW analytic path matches quadrature") {
  Rng rng(13);
  InputPrior prior = InputPrior::uniform();
  for (int trial = 0; trial < 5; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    GpModel m = random_model(8 + 6 * trial, dim, rng, 0.3, 1e-2);
    LikelihoodWeight lw = make_weight(m, prior, rng, /*t=*/dim == 3 ? 0.7 : 0.0);
    REQUIRE(lw.gmm.size() == 2);
    AcquisitionContext ctx;
    ctx.model = &m;
    ctx.prior = &prior;
    ctx.weight = &lw;
    AcquisitionEvaluator eval(AcquisitionKind::IVRLW, ctx);
    for (int i = 0; i < 4; ++i) {
      const Vec2 z(rng.uniform(), rng.uniform());
      const Eigen::VectorXd x = model_input(dim, z, 0.7);
      const double analytic = eval.value(x);
      const double quad = ivr_lw_quadrature(ctx, x, 128);
      CHECK(analytic == doctest::Approx(quad).epsilon(1e-3));
    }
  }
}

TEST_CASE("IVR-LW with a single wide component agrees with IVR on ranking") {
  Rng rng(17);
  GpModel m = random_model(12, 2, rng);
  InputPrior prior = InputPrior::uniform();
  LikelihoodWeight lw;
  lw.prior = prior;
  Eigen::VectorXd flat(200);
  for (int i = 0; i < flat.size(); ++i) flat[i] = rng.normal();
  lw.out_density = OutputDensity::from_samples(flat);
  GmmComponent wide;
  wide.weight = 1.0;
  wide.mean = Vec2(0.5, 0.5);
  wide.var = Vec2(400.0, 400.0);  // effectively flat over the unit square
  lw.gmm.components = {wide};

  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.weight = &lw;
  AcquisitionEvaluator lw_eval(AcquisitionKind::IVRLW, ctx);
  AcquisitionEvaluator ivr_eval(AcquisitionKind::IVR, ctx);
  std::vector<double> a, b;
  for (int i = 0; i < 20; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    a.push_back(lw_eval.value(z));
    b.push_back(ivr_eval.value(z));
  }
  CHECK(argmax_index(a) == argmax_index(b));
}

TEST_CASE("scaling the GMM mass leaves LW argmaxes unchanged") {
  Rng rng(19);
  GpModel m = random_model(15, 2, rng);
  InputPrior prior = InputPrior::uniform();
  LikelihoodWeight lw = make_weight(m, prior, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.weight = &lw;
  std::vector<Vec2> zs;
  for (int i = 0; i < 30; ++i) zs.emplace_back(rng.uniform(), rng.uniform());

  std::vector<double> before;
  {
    AcquisitionEvaluator e(AcquisitionKind::IVRLW, ctx);
    for (const auto& z : zs) before.push_back(e.value(z));
  }
  LikelihoodWeight scaled = lw;
  scaled.gmm.scale_mass(scaled.gmm.total_mass() * 37.5);
  ctx.weight = &scaled;
  std::vector<double> after;
  {
    AcquisitionEvaluator e(AcquisitionKind::IVRLW, ctx);
    for (const auto& z : zs) after.push_back(e.value(z));
  }
  CHECK(argmax_index(before) == argmax_index(after));
  for (size_t i = 0; i < zs.size(); ++i) CHECK(after[i] == doctest::Approx(37.5 * before[i]).epsilon(1e-9));
}

TEST_CASE("classic criteria basics") {
  Rng rng(21);
  Dataset d = Dataset::empty(2);
  d.append(Vec2(0.3, 0.3), 0.5);
  d.append(Vec2(0.7, 0.7), -0.2);
  GpModel m(iso_params(2, 1.0, 0.2, 0.0), d);
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.y_star = -0.2;

  SUBCASE("kappa=0 UCB ranks by -mu when sigma ties") {
    ctx.kappa = 0.0;
    // two points symmetric w.r.t. the data, equal sigma by symmetry
    const Vec2 a(0.3, 0.7), b(0.7, 0.3);
    CHECK(m.posterior_var(a) == doctest::Approx(m.posterior_var(b)).epsilon(1e-10));
    const double ua = acq_classic(ctx, a, AcquisitionKind::UCB);
    const double ub = acq_classic(ctx, b, AcquisitionKind::UCB);
    CHECK(((ua > ub) == (m.posterior_mean(a) < m.posterior_mean(b))));
  }
  SUBCASE("EI vanishes at a noiseless observed point") {
    ctx.kappa = 0.0;
    // residual jitter leaves sigma ~ 1e-5, so EI ~ sigma * phi(0)
    CHECK(acq_classic(ctx, Vec2(0.7, 0.7), AcquisitionKind::EI) <= 1e-5);
  }
  SUBCASE("PI/EI are finite and within range") {
    ctx.kappa = 1.0;
    for (int i = 0; i < 50; ++i) {
      const Vec2 z(rng.uniform(), rng.uniform());
      const double pi = acq_classic(ctx, z, AcquisitionKind::PI);
      const double ei = acq_classic(ctx, z, AcquisitionKind::EI);
      CHECK(pi >= 0.0);
      CHECK(pi <= 1.0);
      CHECK(ei >= 0.0);
      CHECK(std::isfinite(acq_classic(ctx, z, AcquisitionKind::UCB)));
    }
  }
  SUBCASE("log forms agree with linear forms in the moderate regime") {
    ctx.kappa = 0.5;
    for (int i = 0; i < 30; ++i) {
      const Vec2 z(rng.uniform(), rng.uniform());
      for (auto kind : {AcquisitionKind::PI, AcquisitionKind::EI}) {
        const double lin = acq_classic(ctx, z, kind);
        if (lin > 1e-200) {
          CHECK(acq_classic_log(ctx, z, kind) == doctest::Approx(std::log(lin)).epsilon(1e-6));
        }
      }
    }
  }
  SUBCASE("y_star is required") {
    AcquisitionContext bad;
    bad.model = &m;
    CHECK_THROWS_AS(acq_classic(bad, Vec2(0.5, 0.5), AcquisitionKind::EI), ContractError);
  }
}

TEST_CASE("pure-exploration limit: UCB/PI/EI argmax equals US argmax") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    GpModel m = random_model(8 + trial, 2, rng, 0.2 + 0.1 * rng.uniform(), 1e-2);
    std::vector<Vec2> probes;
    for (int i = 0; i < 100; ++i) probes.emplace_back(rng.uniform(), rng.uniform());

    AcquisitionContext ctx;
    ctx.model = &m;
    ctx.y_star = m.data().outputs.minCoeff();
    for (double kappa : {1e3, 1e6}) {
      ctx.kappa = kappa;
      std::vector<double> us, ucb, pi, ei;
      for (const auto& z : probes) {
        us.push_back(m.posterior_var(z));
        ucb.push_back(acq_classic(ctx, z, AcquisitionKind::UCB));
        pi.push_back(acq_classic_log(ctx, z, AcquisitionKind::PI));
        ei.push_back(acq_classic_log(ctx, z, AcquisitionKind::EI));
      }
      const int ref = argmax_index(us);
      CHECK(argmax_index(ucb) == ref);
      CHECK(argmax_index(pi) == ref);
      CHECK(argmax_index(ei) == ref);
    }
  }
}

TEST_CASE("acquisition values are finite and nonnegative") {
  Rng rng(29);
  GpModel m = random_model(20, 2, rng);
  InputPrior prior = InputPrior::gaussian(Vec2(0.4, 0.6), 0.02 * Eigen::Matrix2d::Identity());
  LikelihoodWeight lw = make_weight(m, prior, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.weight = &lw;
  ctx.quad.n = 32;
  for (auto kind : {AcquisitionKind::US, AcquisitionKind::USIW, AcquisitionKind::USLW,
                    AcquisitionKind::IVR, AcquisitionKind::IVRIW, AcquisitionKind::IVRLW}) {
    AcquisitionEvaluator e(kind, ctx);
    for (int i = 0; i < 25; ++i) {
      const double v = e.value(Vec2(rng.uniform(), rng.uniform()));
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("IVR-IW with uniform prior matches plain IVR") {
  Rng rng(31);
  GpModel m = random_model(10, 2, rng);
  InputPrior prior = InputPrior::uniform();
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.quad.n = 48;
  AcquisitionEvaluator iw(AcquisitionKind::IVRIW, ctx);
  AcquisitionEvaluator plain(AcquisitionKind::IVR, ctx);
  for (int i = 0; i < 20; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    CHECK(iw.value(z) == doctest::Approx(plain.value(z)).epsilon(1e-12));
  }
}
