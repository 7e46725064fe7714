#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "choquard/error.hpp"
#include "choquard/spectrum.hpp"

using namespace choquard;

namespace {

double max_spacing(const RadialGrid& g) {
  double h = g.nodes()[0];
  for (std::size_t i = 1; i < g.size(); ++i) h = std::max(h, g.nodes()[i] - g.nodes()[i - 1]);
  return h;
}

const GroundState& ground_state_312() {
  static const GroundState s = solve_choquard(ChoquardParams::make(3, 1.0, 2.0), make_grid(3, 25.0, 600, 1.006));
  return s;
}

}  // namespace

TEST_CASE("free operator") {
  for (int d : {1, 3, 4}) {
    GroundState s;
    s.params = ChoquardParams::make(d, 0.5 * d, 2.0);
    s.field = RadialField::zeros(make_grid(d, 25.0, 300, 1.006));
    const double h = max_spacing(*s.field.grid);
    for (int ell : {0, 1}) {
      CAPTURE(d);
      CAPTURE(ell);
      const auto op = assemble_lplus(s, ell);
      CHECK(op.asymmetry <= 1e-10);
      const auto e = eig_smallest(op, 3);
      CHECK(e[0].value >= 1.0 - 10.0 * h * h);
      CHECK(e[0].value <= e[1].value);
      // Lowest Dirichlet mode of the ball of radius 25, slightly above 1.
      CHECK(e[0].value <= 1.05);
    }
  }
}

TEST_CASE("eigenfields are normalized in the discrete L2 product") {
  const auto& s = ground_state_312();
  for (int ell : {0, 1}) {
    const auto e = eig_smallest(assemble_lplus(s, ell), 4);
    const auto m = s.field.grid->masses(sector_parity(ell));
    for (const auto& pair : e) {
      double norm = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) norm += m[i] * pair.field.values[i] * pair.field.values[i];
      CHECK(s.field.grid->sphere_area() * norm == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("L+ Q identity and translation mode") {
  const auto& s = ground_state_312();
  const double p = s.params.p;
  const auto op = assemble_lplus(s, 0);
  CHECK(op.asymmetry <= 1e-10);
  const auto lq = apply_lplus(s, 0, s.field.values);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lq.size(); ++i) {
    const double target = -2.0 * (p - 1.0) * op.potential_V.values[i] * s.field.values[i];
    num = std::max(num, std::abs(lq[i] - target));
    den = std::max(den, std::abs(target));
  }
  CHECK(num / den <= 1e-6);

  auto dq = radial_derivative(s.field).values;
  for (double& x : dq) x = -x;
  const auto lt = apply_lplus(s, 1, dq);
  const auto m = s.field.grid->masses(Parity::odd);
  double lt_l2 = 0.0, dq_l2 = 0.0;
  for (std::size_t i = 0; i < dq.size(); ++i) {
    lt_l2 += m[i] * lt[i] * lt[i];
    dq_l2 += m[i] * dq[i] * dq[i];
  }
  CHECK(std::sqrt(lt_l2 / dq_l2) <= 1e-4);
}

TEST_CASE("L+ Q identity for the local model") {
  const auto s = solve_model(1, 3.0, make_grid(1, 25.0, 800, 1.0));
  const auto lq = apply_lplus(s, 0, s.field.values);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lq.size(); ++i) {
    const double target = -2.0 * std::pow(s.field.values[i], 3.0);
    num = std::max(num, std::abs(lq[i] - target));
    den = std::max(den, std::abs(target));
  }
  CHECK(num / den <= 1e-6);
}

TEST_CASE("non-degeneracy at (3,1,2)") {
  const auto& s = ground_state_312();
  const auto rep = nondegeneracy_verdict(s);
  CHECK(rep.radial_kernel_trivial);
  CHECK(rep.translation_mode_found);
  CHECK(rep.negative_count_ell0 >= 1);
  CHECK(std::abs(rep.nearest_zero_ell1) <= 5e-3);
  CHECK(rep.translation_correlation > 0.99);
  CHECK(rep.eigenvalues_ell0.front() < 0.0);
  for (double e : rep.eigenvalues_ell0) CHECK(std::abs(e) >= 0.05);
}

TEST_CASE("non-degeneracy at (3, 1.02, 2.02)") {
  const auto s = solve_choquard(ChoquardParams::make(3, 1.02, 2.02), make_grid(3, 25.0, 600, 1.006));
  const auto rep = nondegeneracy_verdict(s);
  CHECK(rep.radial_kernel_trivial);
  CHECK(rep.translation_mode_found);
  CHECK(rep.negative_count_ell0 >= 1);
}

TEST_CASE("translation eigenvalue shrinks under refinement") {
  const auto params = ChoquardParams::make(3, 1.0, 2.0);
  const auto coarse = eig_smallest(assemble_lplus(solve_choquard(params, make_grid(3, 25.0, 150, 1.0)), 1), 1);
  const auto fine = eig_smallest(assemble_lplus(solve_choquard(params, make_grid(3, 25.0, 300, 1.0)), 1), 1);
  CHECK(std::abs(fine[0].value) * 3.0 <= std::abs(coarse[0].value));
}

TEST_CASE("errors") {
  const auto& s = ground_state_312();
  CHECK_THROWS_AS(assemble_lplus(s, 2), Error);
  CHECK_THROWS_AS(eig_smallest(assemble_lplus(s, 0), 11), Error);
  GroundState raw = s;
  raw.converged = false;
  CHECK_THROWS_AS(assemble_lplus(raw, 0), Error);
}
