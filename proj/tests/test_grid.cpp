#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "choquard/error.hpp"
#include "choquard/grid.hpp"

using namespace choquard;
using std::numbers::pi;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double laplacian_error(const GridPtr& g, double r_cut) {
  auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  const int d = g->dim();
  auto lap = laplacian_sector(f, 0);
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = g->nodes()[i];
    if (r < r_cut) continue;
    const double exact = (2.0 * d - 4.0 * r * r) * std::exp(-r * r);
    err = std::max(err, std::abs(lap.values[i] - exact));
  }
  return err;
}

}  // namespace

TEST_CASE("grid construction") {
  auto g = make_grid(3, 10.0, 100, 1.0);
  CHECK(g->size() == 100);
  CHECK(g->nodes().back() == 10.0);
  CHECK(g->nodes()[1] - g->nodes()[0] == doctest::Approx(0.1).epsilon(1e-2));
  double wsum = 0.0;
  for (double w : g->weights()) {
    CHECK(w > 0.0);
    wsum += w;
  }
  CHECK(wsum == doctest::Approx(10.0).epsilon(1e-12));

  auto s = make_grid(3, 20.0, 200, 1.02);
  CHECK(s->nodes().back() == 20.0);
  CHECK(s->nodes().front() > 0.0);
  for (std::size_t i = 1; i < s->size(); ++i) CHECK(s->nodes()[i] > s->nodes()[i - 1]);

  CHECK_NOTHROW(make_grid(1, 15.0, 128, 1.0));
  CHECK_THROWS_AS(make_grid(3, -1.0, 100, 1.0), Error);
  CHECK_THROWS_AS(make_grid(3, 10.0, 15, 1.0), Error);
  CHECK_THROWS_AS(make_grid(3, 10.0, 100, std::nan("")), Error);
}

TEST_CASE("monomial quadrature") {
  for (int d = 1; d <= 5; ++d) {
    for (int n : {200, 400}) {
      auto g = make_grid(d, 10.0, n, 1.0);
      for (int k = 0; k <= 2; ++k) {
        auto f = RadialField::sample(g, [k](double r) { return std::pow(r, k); });
        const double exact = g->sphere_area() * std::pow(10.0, k + d) / (k + d);
        INFO("d=" << d << " n=" << n << " k=" << k);
        CHECK(std::abs(integrate_radial(f) / exact - 1.0) <= 1e-6);
      }
    }
  }
}

TEST_CASE("integrate known values") {
  auto g = make_grid(3, 40.0, 600, 1.006);
  auto e = RadialField::sample(g, [](double r) { return std::exp(-r); });
  CHECK(integrate_radial(e) == doctest::Approx(8.0 * pi).epsilon(1e-8));
  CHECK(integrate_radial(RadialField::zeros(g)) == 0.0);

  // Unit ball with r = 1 on a cell face.
  auto u = make_grid(3, 3.9875, 160, 1.0);
  auto ind = RadialField::sample(u, [](double r) { return r < 1.0 ? 1.0 : 0.0; });
  CHECK(integrate_radial(ind) == doctest::Approx(4.0 * pi / 3.0).epsilon(5e-4));

  auto other = make_grid(3, 40.0, 300, 1.006);
  CHECK_THROWS_AS(integrate_radial(*other, e.values), Error);
}

TEST_CASE("laplacian examples") {
  auto g = make_grid(3, 10.0, 400, 1.0);
  auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  auto lap = laplacian_sector(f, 0);
  const double r0 = g->nodes()[0];
  CHECK(lap.values[0] == doctest::Approx((6.0 - 4.0 * r0 * r0) * std::exp(-r0 * r0)).epsilon(1e-3));

  for (int d = 1; d <= 5; ++d) {
    auto h = make_grid(d, 10.0, 200, 1.006);
    auto c = RadialField::sample(h, [](double) { return 2.5; });
    auto lc = laplacian_sector(c, 0);
    for (std::size_t i = 0; i + 4 < h->size(); ++i) CHECK(std::abs(lc.values[i]) < 1e-9);
    auto x = RadialField::sample(h, [](double r) { return r; });
    auto lx = laplacian_sector(x, 1);
    for (std::size_t i = 0; i + 4 < h->size(); ++i)
      if (h->nodes()[i] >= 1.0) CHECK(std::abs(lx.values[i]) < 1e-6);
  }
  CHECK_THROWS_AS(laplacian_sector(f, -1), Error);
}

TEST_CASE("laplacian convergence") {
  for (int d = 1; d <= 5; ++d) {
    auto g = make_grid(d, 8.0, 100, 1.0);
    auto fine = refine_grid(*g);
    const double r_cut = d == 1 ? 0.0 : 1.0;
    const double e1 = laplacian_error(g, r_cut);
    const double e2 = laplacian_error(fine, r_cut);
    INFO("d=" << d << " e1=" << e1 << " e2=" << e2);
    CHECK(e1 / e2 >= 3.5);
  }
}

TEST_CASE("dirichlet form converges at fourth order") {
  for (int d = 1; d <= 5; ++d) {
    // ∫ |∇e^{-r^2}|^2 dx / |S^{d-1}| = 4 ∫ r^{d+1} e^{-2r^2} dr = Γ(d/2+1) 2^{-d/2}
    const double exact = std::tgamma(0.5 * d + 1.0) * std::pow(2.0, -0.5 * d);
    double prev = 0.0;
    for (int n : {60, 120, 240}) {
      auto g = make_grid(d, 8.0, n, 1.0);
      auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
      const double err = std::abs(SectorLaplacian(g, 0).dirichlet_form(f.values) - exact);
      INFO("d=" << d << " n=" << n << " err=" << err);
      if (prev > 1e-13) CHECK(prev / err >= 10.0);
      prev = err;
    }
  }
}

TEST_CASE("symmetrised laplacian is symmetric") {
  for (int d = 1; d <= 5; ++d)
    for (int ell = 0; ell <= 1; ++ell) {
      auto g = make_grid(d, 20.0, 120, 1.01);
      SectorLaplacian lap(g, ell);
      Eigen::MatrixXd m = lap.dense();
      Eigen::VectorXd s(g->size());
      for (std::size_t i = 0; i < g->size(); ++i) s[i] = std::sqrt(g->masses(sector_parity(ell))[i]);
      Eigen::MatrixXd c = s.asDiagonal() * m * s.asDiagonal().inverse();
      CHECK(max_abs(c - c.transpose()) <= 1e-12 * max_abs(c));
    }
}

TEST_CASE("interpolation and derivative") {
  auto g = make_grid(3, 12.0, 300, 1.006);
  auto f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  for (double r : {0.0, 0.013, 0.5, 1.7, 3.3})
    CHECK(interpolate(f, r) == doctest::Approx(std::exp(-r * r)).epsilon(1e-6));
  CHECK(interpolate(f, 13.0) == 0.0);
  auto df = radial_derivative(f);
  for (std::size_t i = 0; i < g->size(); i += 17) {
    const double r = g->nodes()[i];
    CHECK(std::abs(df.values[i] + 2.0 * r * std::exp(-r * r)) < 1e-6);
  }
  auto fine = refine_grid(*g);
  auto rf = resample(f, fine);
  for (std::size_t i = 0; i < fine->size(); i += 23)
    CHECK(std::abs(rf.values[i] - std::exp(-fine->nodes()[i] * fine->nodes()[i])) < 1e-6);
}

TEST_CASE("radially decreasing flag") {
  auto g = make_grid(2, 5.0, 50, 1.0);
  auto f = RadialField::sample(g, [](double r) { return std::exp(-r); });
  CHECK(f.check_radially_decreasing());
  f.values[10] = 2.0;
  CHECK_FALSE(f.check_radially_decreasing());
}
