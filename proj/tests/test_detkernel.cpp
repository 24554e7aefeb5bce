#include <doctest.h>

#include <cmath>
#include <random>

#include "amolab/detkernel.hpp"
#include "amolab/errors.hpp"
#include "amolab/spectral.hpp"
#include "oracle.hpp"

using namespace amolab;

namespace {

ModelParams golden_params(double lambda, ThetaKind th = ThetaKind::Zero, int depth = 40) {
  return make_params(lambda, cfrac::Frequency::golden(depth), th);
}

double ln(const LogSigned& x) { return x.logmag.to_double(); }

// A mid-spectrum eigenvalue of the (2M+1)-site box.
Real spectral_energy(const ModelParams& p, int M, long index) {
  auto v = spectral::box_potential(p, M);
  return spectral::eigenvalues_by_index(v, index, index + 1, Real("1e-30")).front();
}

}  // namespace

TEST_CASE("potential at the resonant phases") {
  auto p = golden_params(3.0);
  CHECK(potential(0, p) == Real(6));
  p.theta = ThetaKind::Half;
  CHECK(potential(0, p) == Real(-6));
  for (auto th : kAllThetaKinds) {
    p.theta = th;
    for (Site n = -50; n <= 50; ++n) CHECK(abs(potential(n, p)) <= Real(6));
  }
}

TEST_CASE("potential at alpha/2, n = -1, against a 256-bit cosine") {
  auto p = golden_params(3.0, ThetaKind::HalfAlpha);
  Real got = potential(-1, p);
  Real ref;
  {
    PrecisionGuard g(256);
    Real alpha = Real(p.freq->p_deep()) / Real(p.freq->q_deep());
    Real x = Real::pi() * alpha;
    ref = Real(6) * cos(x);
  }
  CHECK(abs(got - ref) < Real("1e-35"));
}

TEST_CASE("small determinants by hand") {
  auto p = golden_params(3.0).with_energy(Real("0.37"));
  for (Site x1 : {-5, 0, 7}) {
    auto s = det::det_sequence(p, x1, 2);
    CHECK(s.value(0).sign == 1);
    CHECK(s.value(0).logmag == Real(0));
    Real a = potential(x1, p) - p.energy;
    Real b = potential(x1 + 1, p) - p.energy;
    CHECK(abs(s.value(1).value() - a) < Real("1e-35"));
    CHECK(abs(s.value(2).value() - (a * b - Real(1))) < Real("1e-34"));
  }
}

TEST_CASE("determinants equal dense minors for k <= 12") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> E(-8, 8);
  for (auto th : kAllThetaKinds) {
    auto p = golden_params(3.0, th).with_energy(Real(E(rng)));
    auto seq = det::det_sequence(p, -4, 12);
    std::vector<Real> v;
    for (Site n = -4; n < 8; ++n) v.push_back(potential(n, p));
    for (int k = 1; k <= 12; ++k) {
      std::vector<Real> vk(v.begin(), v.begin() + k);
      Real ref = oracle::determinant(oracle::tridiagonal(vk, p.energy));
      LogSigned got = seq.value(k);
      CHECK(got.sign == ref.sign());
      CHECK(abs(got.logmag - log(abs(ref))) < Real("1e-28"));
    }
  }
}

TEST_CASE("30-step windows recomputed in double agree with the anchors") {
  auto p = golden_params(3.0, ThetaKind::HalfAlpha);
  p.energy = spectral_energy(p, 100, 90);
  const int K = 900;
  auto seq = det::det_sequence(p, 0, K);
  std::vector<double> v;
  for (Site n = 0; n < K; ++n) v.push_back((potential(n, p) - p.energy).to_double());
  int windows = 0;
  for (int j = 1; j + 31 <= K; j += 37) {
    const long ref = seq.raw[j].exp2;
    double prev = seq.raw[j - 1].relative_to(ref), cur = seq.raw[j].relative_to(ref);
    double scale_log = static_cast<double>(ref) * std::log(2.0);
    double peak = std::max(std::fabs(prev), std::fabs(cur));
    for (int m = 1; m <= 30; ++m) {
      double next = v[j + m - 1] * cur - prev;
      prev = cur;
      cur = next;
      // Rescale in double too, tracking the exponent.
      int e = 0;
      std::frexp(cur, &e);
      if (std::abs(e) > 200) {
        cur = std::ldexp(cur, -e);
        prev = std::ldexp(prev, -e);
        peak = std::ldexp(peak, -e);
        scale_log += e * std::log(2.0);
      }
      // Spectral E makes P_k pass close to zero inside a window, where the
      // double recursion loses digits to cancellation; errors are measured
      // against the largest |P| seen in the window.
      LogSigned want = seq.value(j + m);
      double want_rel = seq.raw[j + m].relative_to(ref) * std::exp(static_cast<double>(ref) * std::log(2.0) - scale_log);
      peak = std::max(peak, std::fabs(cur));
      CHECK(std::fabs(cur - want_rel) <= 1e-6 * peak);
      if (std::fabs(cur) >= 1e-6 * peak) CHECK((cur > 0 ? 1 : -1) == want.sign);
      if (std::fabs(cur) >= 1e-2 * peak) {
        double got = std::log(std::fabs(cur)) + scale_log;
        CHECK(std::fabs(got - ln(want)) <= 1e-6 * std::max(1.0, std::fabs(ln(want))));
      }
    }
    ++windows;
  }
  CHECK(windows > 10);
}

TEST_CASE("determinant growth for spectral E at k = 50") {
  auto p = golden_params(3.0);
  p.energy = spectral_energy(p, 100, 60);
  for (Site x1 : {0, 13, -40}) {
    auto s = det::det_sequence(p, x1, 50);
    CHECK(ln(s.value(50)) / 50 <= std::log(3.0) + 0.2);
  }
}

TEST_CASE("sequence from a table equals the parameter form") {
  auto p = golden_params(2.5, ThetaKind::HalfAlphaPlusHalf).with_energy(Real("1.25"));
  auto table = PotentialTable::sites(p, -30, 60);
  auto a = det::det_sequence(p, -10, 50);
  auto b = det::det_sequence(table, p.energy, -10, 50);
  for (int k = 0; k <= 50; ++k) {
    CHECK(a.value(k).sign == b.value(k).sign);
    CHECK(a.value(k).logmag == b.value(k).logmag);
  }
  CHECK(det::final_det(table.site_values(-10, 39), p.energy).logmag == a.value(50).logmag);
}

TEST_CASE("evenness in theta + (k-1) alpha / 2") {
  auto p = golden_params(3.0).with_energy(Real("0.5"));
  for (int k : {1, 2, 5, 8, 13}) {
    auto r = det::evenness_check(p, k, 64);
    CHECK(r.samples == 64);
    CHECK(r.signs_agree);
    CHECK(r.max_residual < Real("1e-20"));
  }
}

TEST_CASE("theta sweep matches pointwise evaluation") {
  auto p = golden_params(3.0).with_energy(Real("-1.5"));
  std::vector<Real> es{p.energy};
  auto sweep = det::theta_sweep(p, es, 20, 40, 0.25);
  for (int i = 0; i < 40; i += 7) {
    Real theta = (Real(i) + Real(0.25)) / Real(40);
    auto direct = det::logdet_at_theta(p, theta, 20);
    CHECK(direct.sign == sweep[0][i].sign);
    CHECK(abs(direct.logmag - sweep[0][i].logmag) < Real("1e-25"));
  }
}

TEST_CASE("sturm counts outside the norm bound") {
  auto p = golden_params(3.0);
  CHECK(det::sturm_count(p, 20, Real(-8.01)).count == 0);
  CHECK(det::sturm_count(p, 20, Real(8.01)).count == 41);
  CHECK_THROWS_AS(det::sturm_count(p, 0, Real(0)), PreconditionError);
}

TEST_CASE("sturm count N = 10 at E = 0 against Jacobi") {
  auto p = golden_params(3.0);
  std::vector<double> v;
  for (Site n = -10; n <= 10; ++n) v.push_back(potential(n, p).to_double());
  auto jac = oracle::jacobi(oracle::tridiagonal(v));
  long below = 0;
  for (double x : jac.values) below += x < 0;
  CHECK(det::sturm_count(p, 10, Real(0)).count == below);
}

TEST_CASE("sturm counts against Jacobi over random draws") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(0.2, 6), unit(0, 1);
  std::uniform_int_distribution<int> size(1, 60), kind(0, 3);
  for (int draw = 0; draw < 100; ++draw) {
    const double lambda = lam(rng);
    const int N = size(rng);
    auto p = golden_params(lambda, kAllThetaKinds[kind(rng)]);
    auto vr = spectral::box_potential(p, N);
    std::vector<double> v;
    for (auto& x : vr) v.push_back(x.to_double());
    auto jac = oracle::jacobi(oracle::tridiagonal(v));
    long prev = -1;
    for (int s = 0; s < 10; ++s) {
      double E = -2 - 2 * lambda + (4 + 4 * lambda) * (s + unit(rng)) / 10;
      long below = 0;
      bool near = false;
      for (double x : jac.values) {
        below += x < E;
        near |= std::fabs(x - E) < 1e-9;
      }
      auto c = det::sturm_count(vr, Real(E));
      if (!near) CHECK(c.count == below);
      CHECK(c.count >= prev);
      prev = c.count;
    }
  }
}

TEST_CASE("sturm boundary flag at an exact eigenvalue") {
  // diag(0, 0, 0) has eigenvalues 0 and +-sqrt 2.
  std::vector<Real> v(3, Real(0));
  auto c = det::sturm_count(v, Real(0));
  CHECK(c.boundary);
  CHECK_FALSE(det::sturm_count(v, Real("0.1")).boundary);
}

TEST_CASE("twisted gammas are reciprocal resolvent diagonals") {
  auto p = golden_params(3.0).with_energy(Real("0.3"));
  auto v = spectral::box_potential(p, 6);
  auto g = det::twisted_gammas(v, p.energy);
  auto inv = oracle::inverse(oracle::tridiagonal(v, p.energy));
  for (size_t i = 0; i < v.size(); ++i) CHECK(abs(g[i] * inv[i][i] - Real(1)) < Real("1e-28"));
}

TEST_CASE("lyapunov exponent equals ln lambda on the spectrum") {
  for (double lambda : {3.0, 10.0}) {
    auto p = golden_params(lambda);
    for (long idx : {40L, 100L, 170L}) {
      p.energy = spectral_energy(p, 100, idx);
      auto r = det::lyapunov(p, 10000);
      CHECK(std::fabs(r.estimate - std::log(lambda)) <= 0.05 * std::log(lambda));
      CHECK(std::fabs(r.last_quarter_mean - std::log(lambda)) <= 0.05 * std::log(lambda));
      CHECK(r.max_det_deviation <= 1e-10);
      CHECK(r.running.size() == 10000);
    }
  }
}

TEST_CASE("lyapunov far outside the spectrum follows ln E") {
  auto p = golden_params(3.0).with_energy(Real(1000));
  auto r = det::lyapunov(p, 2000);
  CHECK(r.estimate == doctest::Approx(std::log(1000.0)).epsilon(0.01));
  CHECK_THROWS_AS(det::lyapunov(p, 999), PreconditionError);
  CHECK_THROWS_AS(det::lyapunov(golden_params(0.5), 2000), PreconditionError);
}

TEST_CASE("sup_logdet for k = 1 is ln(2 lambda + |E|)") {
  auto p = golden_params(3.0).with_energy(Real("0.7"));
  auto s = det::sup_logdet(p, 1, 8);
  CHECK(abs(s.value - log(Real("6.7"))) < Real("1e-30"));
}

TEST_CASE("sup_logdet stays below ln lambda on the spectrum") {
  auto p = golden_params(3.0);
  p.energy = spectral_energy(p, 150, 140);
  auto s = det::sup_logdet(p, 200, 800);
  CHECK(s.value.to_double() <= std::log(3.0) + 0.1);
  auto t = det::sup_logdet(p, 100, 400);
  CHECK(std::fabs(t.refinement_change) < 1e-3);
  CHECK_THROWS_AS(det::sup_logdet(p, 100, 399), PreconditionError);
}
