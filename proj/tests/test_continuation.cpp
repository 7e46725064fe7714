#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "choquard/continuation.hpp"
#include "choquard/error.hpp"

using namespace choquard;

namespace {

const GridPtr& grid3() {
  static const GridPtr g = make_grid(3, 25.0, 400, 1.006);
  return g;
}

const GroundState& newtonian() {
  static const GroundState s = solve_choquard(ChoquardParams::make(3, 1.0, 2.0), grid3());
  return s;
}

}  // namespace

TEST_CASE("continuation to the base point is the identity") {
  const auto r = newton_continue(newtonian(), newtonian().params, 3);
  CHECK(r.newton_steps == 0);
  CHECK(r.increments == 0);
  CHECK(r.state.field.values == newtonian().field.values);
  CHECK(r.fixed_point_residual <= 1e-10);
}

TEST_CASE("continuation to (3, 1.02, 2.02) in four steps") {
  const auto target = ChoquardParams::make(3, 1.02, 2.02);
  const auto r = newton_continue(newtonian(), target, 4);
  CHECK(r.state.converged);
  CHECK(r.state.params == target);
  CHECK(r.increments == 4);
  CHECK(r.bisections == 0);
  CHECK(r.fixed_point_residual <= 1e-10);
  CHECK(r.quadratic_tail);
  CHECK(r.state.field.radially_decreasing);
  const auto fresh = solve_choquard(target, grid3());
  CHECK(state_distance(fresh.field, r.state.field).Linf <= 1e-6);
}

TEST_CASE("geometric approach to the Newtonian point") {
  const auto path = geometric_path(3, 4);
  REQUIRE(path.size() == 5);
  CHECK(path[0].first == doctest::Approx(1.04));
  CHECK(path[4].second == doctest::Approx(2.0025));
  SweepOptions opts;
  opts.reference = &newtonian();
  const auto recs = sweep_points(3, path, grid3(), opts);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(recs[k].converged);
    REQUIRE(recs[k].gamma.has_value());
    CHECK(*recs[k].gamma >= 0.48);
    CHECK(recs[k].norms.at("H1") >= 0.01);
    if (k > 0) {
      CHECK(recs[k].dist_to_newtonian.H1 < recs[k - 1].dist_to_newtonian.H1);
      CHECK(recs[k].dist_to_newtonian.Linf < recs[k - 1].dist_to_newtonian.Linf);
    }
  }
}

TEST_CASE("self-distance at the Newtonian point") {
  for (bool continued : {false, true}) {
    SweepOptions opts;
    opts.continued = continued;
    const auto recs = sweep_points(3, {{1.0, 2.0}}, grid3(), opts);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].converged);
    CHECK(recs[0].dist_to_newtonian.H1 <= 1e-8);
    CHECK(recs[0].dist_to_newtonian.Linf <= 1e-8);
  }
}

TEST_CASE("two routes agree on a small lattice; jobs do not change results") {
  SweepOptions opts;
  opts.reference = &newtonian();
  opts.two_route = true;
  opts.spectral = true;
  const std::vector<double> alphas{0.98, 1.02};
  const std::vector<double> ps{2.0, 2.02};
  const auto serial = sweep(3, alphas, ps, grid3(), opts);
  opts.jobs = 3;
  const auto parallel = sweep(3, alphas, ps, grid3(), opts);
  REQUIRE(serial.size() == 4);
  CHECK(serial[1].params.alpha == 0.98);
  CHECK(serial[1].params.p == 2.02);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].converged);
    REQUIRE(serial[i].two_route_linf.has_value());
    CHECK(*serial[i].two_route_linf <= 1e-5);
    REQUIRE(serial[i].nearest_zero_ell1.has_value());
    CHECK(std::abs(*serial[i].nearest_zero_ell1) <= 5e-3);
    CHECK(serial[i].norms == parallel[i].norms);
    CHECK(serial[i].dist_to_newtonian.H1 == parallel[i].dist_to_newtonian.H1);
  }
}

TEST_CASE("per-point failures are recorded") {
  SweepOptions opts;
  opts.reference = &newtonian();
  opts.solver.max_iter = 1;
  opts.solver.newton_polish = false;
  opts.solver.fallback = false;
  const auto recs = sweep_points(3, {{1.0, 2.0}, {1.01, 2.01}}, grid3(), opts);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.error.empty());
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(sweep(3, {}, {2.0}, grid3()), Error);
  CHECK_THROWS_AS(sweep_points(3, {{1.0, 1.4}}, grid3()), Error);
  CHECK_THROWS_AS(newton_continue(newtonian(), ChoquardParams::make(3, 1.0, 1.4), 2), Error);
  CHECK_THROWS_AS(newton_continue(newtonian(), ChoquardParams::make(3, 1.01, 2.0), 0), Error);
  GroundState raw = newtonian();
  raw.converged = false;
  CHECK_THROWS_AS(newton_continue(raw, ChoquardParams::make(3, 1.01, 2.0), 2), Error);
}
