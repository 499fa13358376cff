#include "biconf/tensor.hpp"
#include "biconf/error.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace biconf;

namespace {

RealTensor random_tensor(std::mt19937_64& rng, int n, std::vector<Valence> v) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  RealTensor t(n, std::move(v));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = d(rng);
  return t;
}

}  // namespace

TEST_CASE("shape and indexing") {
  RealTensor t(3, {Valence::Up, Valence::Down, Valence::Down});
  CHECK(t.size() == 27);
  CHECK(t.rank() == 3);
  t(1, 2, 0) = 5.0;
  CHECK(t[1 * 9 + 2 * 3 + 0] == 5.0);
  std::array<int, 3> idx{};
  t.unflatten(15, idx);
  CHECK(idx == std::array<int, 3>{1, 2, 0});
}

TEST_CASE("trace of the identity") {
  RealTensor d = identity<double>(4);
  RealTensor s = contract(d, 0, 1);
  CHECK(s.rank() == 0);
  CHECK(s[0] == 4.0);
  RealTensor g(4, {Valence::Down, Valence::Down});
  CHECK_THROWS_AS(contract(g, 0, 1), std::invalid_argument);
}

TEST_CASE("contraction against an index-loop oracle") {
  std::mt19937_64 rng(3);
  const int n = 4;
  RealTensor t = random_tensor(rng, n, {Valence::Up, Valence::Down, Valence::Down, Valence::Up});
  RealTensor c = contract(t, 3, 1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += t(a, k, b, k);
      CHECK(std::fabs(c(a, b) - s) <= 1e-13);
    }
  }
  CHECK(c.valences() == std::vector<Valence>{Valence::Up, Valence::Down});
}

TEST_CASE("antisymmetrization") {
  std::mt19937_64 rng(4);
  const int n = 3;
  RealTensor t = random_tensor(rng, n, {Valence::Down, Valence::Down, Valence::Down});
  RealTensor a = antisymmetrize(t, {0, 1});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) CHECK(std::fabs(a(i, j, k) - 0.5 * (t(i, j, k) - t(j, i, k))) <= 1e-14);
    }
  }
  RealTensor aa = antisymmetrize(a, {0, 1});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(aa[i] - a[i]) <= 1e-15);
  RealTensor s = symmetrize(t, {0, 1});
  CHECK(max_abs(antisymmetrize(s, {0, 1})) <= 1e-15);

  RealTensor a3 = antisymmetrize(t, {0, 1, 2});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double want = (t(i, j, k) + t(j, k, i) + t(k, i, j) - t(j, i, k) - t(i, k, j) - t(k, j, i)) / 6.0;
        CHECK(std::fabs(a3(i, j, k) - want) <= 1e-14);
      }
    }
  }
  RealTensor mixed(n, {Valence::Up, Valence::Down});
  CHECK_THROWS_AS(antisymmetrize(mixed, {0, 1}), std::invalid_argument);
}

TEST_CASE("raise, lower and the inverse metric") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  const int n = 4;
  double pt[] = {0.1, 0.2, 0.3, 0.4};
  auto vars = std::vector<Jet>{Jet::seed(pt, 0, 2), Jet::seed(pt, 1, 2), Jet::seed(pt, 2, 2), Jet::seed(pt, 3, 2)};
  JetTensor g(n, {Valence::Down, Valence::Down});
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet v = (i == j) ? Jet(i == 0 ? -2.0 : 2.0) + vars[static_cast<std::size_t>(i)] * vars[static_cast<std::size_t>(j)] * 0.1
                       : d(rng) * biconf::sin(vars[static_cast<std::size_t>(i)] + vars[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  MetricAtPoint m = make_metric(g);
  CHECK(m.signature == std::vector<int>{-1, 1, 1, 1});
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      Jet s(0.0);
      for (int b = 0; b < n; ++b) s += m.g_inv(a, b) * m.g(b, c);
      CHECK(std::fabs(s.value() - (a == c ? 1.0 : 0.0)) <= 1e-12);
      for (double coef : s.coefficients().subspan(1)) CHECK(std::fabs(coef) <= 1e-12);
    }
  }
  JetTensor v(n, {Valence::Down});
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = vars[static_cast<std::size_t>(i)] * 0.5 + 1.0;
  JetTensor back = lower(raise(v, 0, m), 0, m);
  for (int i = 0; i < n; ++i) CHECK(std::fabs(back[static_cast<std::size_t>(i)].value() - v[static_cast<std::size_t>(i)].value()) <= 1e-12);
  CHECK_THROWS_AS(lower(v, 0, m), std::invalid_argument);

  // g^ab A_[ab] = 0
  JetTensor A(n, {Valence::Down, Valence::Down});
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = Jet(d(rng));
  JetTensor anti = antisymmetrize(A, {0, 1});
  JetTensor up = raise(anti, 0, m);
  CHECK(std::fabs(contract(up, 0, 1)[0].value()) <= 1e-11);

  JetTensor singular(2, {Valence::Down, Valence::Down});
  singular(0, 0) = Jet(1.0);
  singular(0, 1) = Jet(1.0);
  singular(1, 0) = Jet(1.0);
  singular(1, 1) = Jet(1.0);
  CHECK_THROWS_AS(make_metric(singular), DomainError);
}

TEST_CASE("operations commute with taking constant parts") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const int n = 3;
  double pt[] = {0.3, -0.2, 0.7};
  JetTensor t(n, {Valence::Up, Valence::Down, Valence::Down});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = biconf::sin(Jet::seed(pt, static_cast<int>(i % 3), 2) * d(rng)) + d(rng);
  }
  RealTensor tv = values(t);
  auto diff = [](const RealTensor& a, const RealTensor& b) { return max_abs(a - b); };
  CHECK(diff(values(contract(t, 0, 2)), contract(tv, 0, 2)) <= 1e-12);
  CHECK(diff(values(antisymmetrize(t, {1, 2})), antisymmetrize(tv, {1, 2})) <= 1e-12);
  CHECK(diff(values(permute(t, {2, 0, 1})), permute(tv, {2, 0, 1})) <= 1e-12);
}

TEST_CASE("dump format") {
  RealTensor t(2, {Valence::Down, Valence::Down});
  t(0, 1) = 0.5;
  std::ostringstream os;
  dump(os, "g", t);
  CHECK(os.str() == "g[1,1] = 0\ng[1,2] = 0.5\ng[2,1] = 0\ng[2,2] = 0\n");
}
