#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "amolab/detkernel.hpp"
#include "amolab/errors.hpp"
#include "amolab/green.hpp"
#include "amolab/spectral.hpp"
#include "oracle.hpp"

using namespace amolab;
using namespace amolab::green;

namespace {

ModelParams golden_params(double lambda, ThetaKind th = ThetaKind::Zero) {
  return make_params(lambda, cfrac::Frequency::golden(40), th);
}

Real spectral_energy(const ModelParams& p, int M, long index) {
  auto v = spectral::box_potential(p, M);
  return spectral::eigenvalues_by_index(v, index, index + 1, Real("1e-30")).front();
}

std::vector<Real> interval_potential(const ModelParams& p, const Interval& I) {
  std::vector<Real> v;
  for (Site n = I.x1; n <= I.x2; ++n) v.push_back(potential(n, p));
  return v;
}

void check_against_inverse(const ModelParams& p, const Interval& I, Site y, const GreenPair& g, const char* tol) {
  auto inv = oracle::inverse(oracle::tridiagonal(interval_potential(p, I), p.energy));
  const Real& left = inv[0][static_cast<size_t>(y - I.x1)];
  const Real& right = inv[static_cast<size_t>(y - I.x1)][static_cast<size_t>(I.k() - 1)];
  CHECK(g.left.sign == left.sign());
  CHECK(g.right.sign == right.sign());
  CHECK(abs(g.left.logmag - log(abs(left))) < Real(tol));
  CHECK(abs(g.right.logmag - log(abs(right))) < Real(tol));
}

}  // namespace

TEST_CASE("single site interval") {
  auto p = golden_params(3.0).with_energy(Real("0.4"));
  Interval I{5, 5};
  Real want = Real(1) / (potential(5, p) - p.energy);
  for (auto g : {green_direct(I, p, 5), green_cramer(I, p, 5)}) {
    CHECK(abs(g.left.value() - want) < Real("1e-35"));
    CHECK(abs(g.right.value() - want) < Real("1e-35"));
  }
}

TEST_CASE("two site interval by hand") {
  auto p = golden_params(3.0).with_energy(Real("-0.9"));
  Interval I{-3, -2};
  Real a = potential(-3, p) - p.energy, b = potential(-2, p) - p.energy;
  // [[a,1],[1,b]]^{-1} has off-diagonal -1/(ab-1).
  Real off = Real(-1) / (a * b - Real(1));
  for (auto g : {green_direct(I, p, -2), green_cramer(I, p, -2)}) CHECK(abs(g.left.value() - off) < Real("1e-34"));
  for (auto g : {green_direct(I, p, -3), green_cramer(I, p, -3)}) CHECK(abs(g.right.value() - off) < Real("1e-34"));
}

TEST_CASE("boundary columns as determinant ratios") {
  auto p = golden_params(3.0, ThetaKind::Half).with_energy(Real("1.1"));
  Interval I = Interval::from_start(-7, 25);
  auto whole = det::det_sequence(p, I.x1, I.k());
  auto at_x2 = green_cramer(I, p, I.x2);
  CHECK(abs(at_x2.left.logmag + whole.value(I.k()).logmag) < Real("1e-30"));
  auto at_x1 = green_cramer(I, p, I.x1);
  auto shifted = det::det_sequence(p, I.x1 + 1, I.k() - 1);
  CHECK(abs(at_x1.left.logmag - (shifted.value(I.k() - 1).logmag - whole.value(I.k()).logmag)) < Real("1e-30"));
  check_against_inverse(p, I, I.x1, green_direct(I, p, I.x1), "1e-25");
}

TEST_CASE("both routes agree with a dense inverse at k = 40") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> start(-200, 200), pos(0, 39);
  std::uniform_real_distribution<double> E(-8, 8);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = golden_params(3.0, kAllThetaKinds[trial % 4]).with_energy(Real(E(rng)));
    Interval I = Interval::from_start(start(rng), 40);
    Site y = I.x1 + pos(rng);
    check_against_inverse(p, I, y, green_direct(I, p, y), "1e-20");
    check_against_inverse(p, I, y, green_cramer(I, p, y), "1e-20");
  }
}

TEST_CASE("Cramer and direct agree over random instances with k <= 300") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> len(1, 300), start(-1000, 1000);
  std::uniform_real_distribution<double> lam(1.5, 8), unit(0, 1);
  int done = 0, resonant = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double lambda = lam(rng);
    auto p = golden_params(lambda, kAllThetaKinds[trial % 4]);
    p.energy = Real((2 + 2 * lambda) * (2 * unit(rng) - 1));
    Interval I = Interval::from_start(start(rng), len(rng));
    Site y = I.x1 + static_cast<Site>(unit(rng) * I.k());
    auto table = PotentialTable::sites(p, I.x1, I.x2);
    GreenPair a, b;
    try {
      a = green_direct(I, table, p.energy, y);
      b = green_cramer(I, table, p.energy, y);
    } catch (const ResonantInterval&) {
      ++resonant;
      continue;
    }
    CHECK(a.left.sign == b.left.sign);
    CHECK(a.right.sign == b.right.sign);
    for (auto [x, z] : {std::pair{a.left.logmag, b.left.logmag}, std::pair{a.right.logmag, b.right.logmag}})
      CHECK(abs(x - z) <= Real("1e-8") * fmax(Real(1), abs(z)));
    ++done;
  }
  CHECK(done >= 990);
  CHECK(resonant + done == 1000);
}

TEST_CASE("Green table matches pointwise Cramer") {
  auto p = golden_params(3.0, ThetaKind::HalfAlpha).with_energy(Real("2.2"));
  Interval I = Interval::from_start(-30, 61);
  auto table = PotentialTable::sites(p, I.x1, I.x2);
  GreenTable gt(I, table, p.energy);
  for (Site y = I.x1; y <= I.x2; y += 5) {
    auto g = green_cramer(I, table, p.energy, y);
    CHECK(gt.at(y).left.sign == g.left.sign);
    CHECK(abs(gt.at(y).left.logmag - g.left.logmag) < Real("1e-28"));
    CHECK(abs(gt.at(y).right.logmag - g.right.logmag) < Real("1e-28"));
  }
}

TEST_CASE("energy at an interval eigenvalue is rejected") {
  auto p = golden_params(3.0);
  Interval I = Interval::from_start(3, 12);
  auto v = interval_potential(p, I);
  p.energy = spectral::eigenvalues_by_index(v, 5, 6, Real("1e-36")).front();
  CHECK_THROWS_AS(check_nonsingular(v, p.energy), ResonantInterval);
  CHECK_THROWS_AS(green_direct(I, p, 5), ResonantInterval);
  CHECK_THROWS_AS(green_cramer(I, p, 5), ResonantInterval);
  CHECK_THROWS_AS(green_cramer(I, p, 20), PreconditionError);
}

TEST_CASE("regular site at the predicted scale") {
  auto p = golden_params(3.0);
  p.energy = spectral_energy(p, 150, 150);
  const auto& f = *p.freq;
  const int n = f.level_below(89);
  int found = 0;
  for (Site y : {20, -20, 25, 60, -67}) {
    auto sc = regularity_scale(y, f, n);
    auto w = is_regular(y, log(Real(3)) - Real(0.3), sc.k, p);
    REQUIRE(w.has_value());
    ++found;
    const Site m = (w->k + 6) / 7;
    CHECK(y - w->interval.x1 >= m);
    CHECK(w->interval.x2 - y >= m);
    CHECK(w->interval.k() == sc.k);
    CHECK(w->slack_left >= Real(0));
    CHECK(w->slack_right >= Real(0));
    auto g = green_cramer(w->interval, p, y);
    CHECK(abs(w->slack_left - (-(w->t * Real(y - w->interval.x1)) - g.left.logmag)) < Real("1e-25"));
  }
  CHECK(found == 5);
}

TEST_CASE("k = 7 keeps one site of margin") {
  auto p = golden_params(3.0).with_energy(Real("0.2"));
  auto w = is_regular(10, Real("0.01"), 7, p);
  REQUIRE(w.has_value());
  CHECK(10 - w->interval.x1 >= 1);
  CHECK(w->interval.x2 - 10 >= 1);
  CHECK_THROWS_AS(is_regular(10, Real("0.01"), 6, p), PreconditionError);
  CHECK_THROWS_AS(is_regular(10, Real(0), 7, p), PreconditionError);
}

TEST_CASE("a singular candidate interval is skipped") {
  auto p = golden_params(3.0);
  const Site y = 40;
  const int k = 30;
  Interval bad = Interval::from_start(y - 12, k);
  p.energy = spectral::eigenvalues_by_index(interval_potential(p, bad), 14, 15, Real("1e-36")).front();
  CHECK_THROWS_AS(green_cramer(bad, p, y), ResonantInterval);
  auto w = is_regular(y, Real("0.05"), k, p);
  REQUIRE(w.has_value());
  CHECK_FALSE(w->interval == bad);
}

TEST_CASE("regularity scale by enumeration") {
  auto f = cfrac::Frequency::golden(20);
  const int n = f.level_below(89);
  REQUIRE(f.q(n) == 89);
  for (Site y = -200; y <= 200; ++y) {
    auto d = cfrac::site_distance(y, f.q(n));
    long room = d.twice.get_si() - 4;
    int n0 = 0;
    for (int c = 1; c <= n; ++c)
      if (8 * f.q(n - c).get_si() <= room) {
        n0 = c;
        break;
      }
    if (n0 == 0) {
      CHECK_THROWS_AS(regularity_scale(y, f, n), PreconditionError);
      continue;
    }
    auto sc = regularity_scale(y, f, n);
    long q = f.q(n - n0).get_si();
    CHECK(sc.n0 == n0);
    CHECK(sc.q_lower == q);
    CHECK(4 * sc.s * q * 2 <= room);
    CHECK(4 * (sc.s + 1) * q * 2 > room);
    CHECK(sc.k == 6 * sc.s * q - 1);
  }
}

TEST_CASE("block expansion is an identity for eigenvectors") {
  auto p = golden_params(3.0, ThetaKind::HalfAlphaPlusHalf);
  auto pairs = spectral::eigen_solve_indices(p, 100, 95, 100);
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> start(-99, 80), len(1, 19);
  for (const auto& pr : pairs) {
    for (int s = 0; s < 5; ++s) {
      Interval I = Interval::from_start(start(rng), len(rng));
      auto q = p.with_energy(pr.energy);
      CHECK(block_expand_residual(pr.vector, I, q) <= Real("1e-20") * pr.vector.sup_norm());
    }
  }
}

TEST_CASE("block expansion of a random vector is far from an identity") {
  auto p = golden_params(3.0).with_energy(Real("0.5"));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  SiteVector phi{-20, {}};
  for (int i = 0; i < 41; ++i) phi.values.emplace_back(u(rng));
  CHECK(block_expand_residual(phi, Interval{-5, 5}, p) > Real("1e-3"));
  CHECK_THROWS_AS(block_expand_residual(phi, Interval{-20, 5}, p), PreconditionError);
  CHECK_THROWS_AS(block_expand_residual(phi, Interval{0, 20}, p), PreconditionError);
}

TEST_CASE("numerator determinants grow no faster than ln lambda + 0.2") {
  auto p = golden_params(3.0);
  for (long idx : {50L, 200L, 350L}) {
    p.energy = spectral_energy(p, 200, idx);
    for (Site x1 : {-300, -17, 0, 91, 250}) {
      auto s = det::det_sequence(p, x1, 300);
      for (int n = 100; n <= 300; ++n) CHECK(s.value(n).logmag.to_double() <= (std::log(3.0) + 0.2) * n);
    }
  }
}

TEST_CASE("expansion chain from a nonresonant site") {
  auto p = golden_params(3.0);
  const int N = 200;
  auto pairs = spectral::eigen_solve_indices(p, N, 0, 2 * N + 1);
  const auto& f = *p.freq;
  const int n = f.level_below(89);
  const double eta = 0.01;
  const Site start = 25;  // dist to the half lattice of 89 is 19.5
  auto [lo, hi] = green::nonresonant_region(start, f, n, eta, -N + 1, N - 1);
  CHECK(lo <= start);
  CHECK(hi >= start);
  int checked = 0, central = 0;
  for (const auto& pr : pairs) {
    if (std::labs(pr.max_site) > 60) continue;
    auto q = p.with_energy(pr.energy);
    auto table = PotentialTable::sites(q, -N, N);
    ChainOptions o;
    o.level = n;
    o.eta = eta;
    o.region_lo = lo;
    o.region_hi = hi;
    o.domain_lo = -N;
    o.domain_hi = N;
    auto chain = expand_chain(start, q, table, o);
    // Regularity is only expected away from the eigenfunction's own centre.
    if (std::labs(pr.max_site) <= 3) {
      CHECK_FALSE(chain.stuck);
      CHECK(chain.hops.size() >= 1);
      ++central;
    }
    auto sc = regularity_scale(start, f, n);
    CHECK(static_cast<long>(chain.hops.size()) <= 4 * 89 / sc.q_lower);
    double sum = 0;
    for (size_t i = 0; i < chain.hops.size(); ++i) {
      sum += chain.hops[i].log_increment;
      if (i + 1 < chain.hops.size()) CHECK(chain.hops[i].exit == chain.hops[i + 1].z);
    }
    CHECK(sum == doctest::Approx(chain.path_log_bound));
    // Certificate: |phi(start)| <= e^cert max over leaves |phi|.
    Real leaf_max(0);
    for (Site z : chain.leaves) leaf_max = fmax(leaf_max, abs(pr.vector.at(z)));
    CHECK(log(abs(pr.vector.at(start))) <= Real(chain.certificate) + log(leaf_max) + Real(1e-9));
    ++checked;
  }
  CHECK(checked >= 50);
  CHECK(central >= 3);
}

TEST_CASE("chain with a one-site region makes one hop") {
  auto p = golden_params(3.0);
  p.energy = spectral_energy(p, 100, 100);
  auto table = PotentialTable::sites(p, -100, 100);
  ChainOptions o;
  o.level = p.freq->level_below(89);
  o.region_lo = o.region_hi = 25;
  o.domain_lo = -100;
  o.domain_hi = 100;
  auto chain = expand_chain(25, p, table, o);
  REQUIRE(chain.hops.size() == 1);
  CHECK(chain.path_log_bound == chain.hops[0].log_increment);
  auto lines = to_json_lines(chain);
  std::istringstream in(lines);
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("x1").get<long>() == chain.hops[0].interval.x1);
    CHECK(j.at("exit").get<long>() == chain.hops[0].exit);
    ++count;
  }
  CHECK(count == 1);
  o.max_hops = 0;
  CHECK_THROWS_WITH_AS(expand_chain(25, p, table, o), "max_hops must be >= 1", PreconditionError);
}
