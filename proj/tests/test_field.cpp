#include "angleaware/field.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace angleaware;

namespace {

GridSpec desk_spec() {
  GridSpec s;
  s.x_min = -0.2;
  s.x_max = 0.2;
  s.y_min = -0.2;
  s.y_max = 0.2;
  s.z_min = 0.0;
  s.z_max = 0.1;
  s.th_min = -kPi;
  s.th_max = kPi;
  s.tv_min = kPi / 3.0;
  s.tv_max = 0.5 * kPi;
  s.res_x = 0.02;
  s.res_y = 0.02;
  s.res_z = 0.02;
  s.res_th = kPi / 15.0;
  s.res_tv = kPi / 30.0;
  return s;
}

}  // namespace

TEST_CASE("derive computes axis counts, robust to span/res rounding") {
  GridSpec s = desk_spec();
  REQUIRE(s.derive());
  CHECK(s.nx == 20);
  CHECK(s.ny == 20);
  CHECK(s.nz == 5);
  CHECK(s.nth == 30);
  CHECK(s.ntv == 5);
  CHECK(s.m == 20 * 20 * 5 * 30 * 5);
}

TEST_CASE("derive rejects bad specs") {
  GridSpec s = desk_spec();
  s.x_min = 1.0;
  s.x_max = -1.0;
  CHECK(!s.derive());

  GridSpec r = desk_spec();
  r.res_y = 0.0;
  CHECK(!r.derive());

  GridSpec t = desk_spec();
  t.res_z = 1.0;  // exceeds the z span
  CHECK(!t.derive());

  CHECK_THROWS_AS((void)build_grid(t), std::invalid_argument);
}

TEST_CASE("cell centers and index ordering") {
  GridSpec s = desk_spec();
  REQUIRE(s.derive());
  const std::vector<Cell> cells = build_grid(s);
  REQUIRE(static_cast<std::int64_t>(cells.size()) == s.m);

  // first cell: all axes at their first center
  CHECK(cells[0].x == doctest::Approx(-0.2 + 0.5 * 0.02).epsilon(1e-12));
  CHECK(cells[0].y == doctest::Approx(-0.19).epsilon(1e-12));
  CHECK(cells[0].z == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(cells[0].theta_h == doctest::Approx(-kPi + 0.5 * kPi / 15.0).epsilon(1e-12));
  CHECK(cells[0].theta_v == doctest::Approx(kPi / 3.0 + 0.5 * kPi / 30.0).epsilon(1e-12));
  CHECK(cells[0].index == 0);

  // theta_v is the fastest axis
  CHECK(cells[1].theta_v == doctest::Approx(cells[0].theta_v + kPi / 30.0).epsilon(1e-12));
  CHECK(cells[1].x == cells[0].x);
  CHECK(cells[1].theta_h == cells[0].theta_h);

  // x is the slowest axis: stride ny*nz*nth*ntv
  const std::int64_t sx = s.ny * s.nz * s.nth * s.ntv;
  CHECK(cells[sx].x == doctest::Approx(cells[0].x + 0.02).epsilon(1e-12));
  CHECK(cells[sx].theta_v == cells[0].theta_v);

  // cell_at agrees with build_grid everywhere (sampled)
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> pick(0, s.m - 1);
  for (int k = 0; k < 2000; ++k) {
    const std::int64_t j = pick(rng);
    const Cell a = s.cell_at(j);
    CHECK(a.x == cells[j].x);
    CHECK(a.y == cells[j].y);
    CHECK(a.z == cells[j].z);
    CHECK(a.theta_h == cells[j].theta_h);
    CHECK(a.theta_v == cells[j].theta_v);
    CHECK(a.index == j);
  }

  // last cell sits half a resolution below the upper bounds
  const Cell last = cells.back();
  CHECK(last.x == doctest::Approx(0.19).epsilon(1e-12));
  CHECK(last.theta_v == doctest::Approx(0.5 * kPi - 0.5 * kPi / 30.0).epsilon(1e-12));
}

TEST_CASE("make_field initializes uniformly") {
  const ImportanceField f = make_field(100, 2.5);
  REQUIRE(f.psi.size() == 100);
  CHECK(f.psi0 == 2.5);
  for (double v : f.psi) CHECK(v == 2.5);
}

TEST_CASE("update_importance applies the decay factor and floors at zero") {
  ImportanceField f = make_field(4, 1.0);
  f.psi = {1.0, 0.5, 0.7, 0.25};
  // hmax > 1 would flip the multiplier negative; the floor catches it
  const std::vector<double> hmax = {0.5, 1.0, 20.0, 0.0};
  update_importance(f, hmax, 10.0, 0.08);  // delta*dt = 0.8
  CHECK(f.psi[0] == doctest::Approx(1.0 * (1.0 - 0.8 * 0.5)).epsilon(1e-15));
  CHECK(f.psi[1] == doctest::Approx(0.5 * 0.2).epsilon(1e-15));
  CHECK(f.psi[2] == 0.0);
  CHECK(f.psi[3] == 0.25);  // hmax = 0 leaves the cell untouched

  // repeated decay follows the geometric envelope
  ImportanceField g = make_field(1, 1.0);
  const std::vector<double> h1 = {1.0};
  for (int k = 0; k < 100; ++k) update_importance(g, h1, 0.2, 0.1);
  CHECK(g.psi[0] == doctest::Approx(0.13261955589475294).epsilon(1e-12));
}

TEST_CASE("update_importance validates inputs") {
  ImportanceField f = make_field(2, 1.0);
  const std::vector<double> hmax = {0.0, 0.0};
  CHECK_THROWS_AS(update_importance(f, hmax, 10.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(update_importance(f, hmax, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(update_importance(f, hmax, 1.0, 0.0), std::invalid_argument);
  const std::vector<double> short_h = {0.0};
  CHECK_THROWS_AS(update_importance(f, short_h, 0.5, 0.1), std::invalid_argument);
}

TEST_CASE("objective sums psi in fixed order") {
  ImportanceField f = make_field(3, 1.0);
  f.psi = {0.25, 0.5, 0.125};
  CHECK(objective(f) == 0.875);

  // deterministic: same vector, same sum bit-for-bit
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImportanceField big = make_field(10000, 1.0);
  for (double& v : big.psi) v = u(rng);
  const double a = objective(big);
  const double b = objective(big);
  CHECK(a == b);
  CHECK(a == doctest::Approx(5000.0).epsilon(0.05));
}

TEST_CASE("angular_mean collapses the two angular axes") {
  GridSpec s;
  s.x_min = 0.0;
  s.x_max = 0.2;
  s.y_min = 0.0;
  s.y_max = 0.1;
  s.z_min = 0.0;
  s.z_max = 0.1;
  s.th_min = 0.0;
  s.th_max = kPi;
  s.tv_min = 0.0;
  s.tv_max = kPi / 2.0;
  s.res_x = 0.1;
  s.res_y = 0.1;
  s.res_z = 0.1;
  s.res_th = kPi / 2.0;
  s.res_tv = kPi / 4.0;
  REQUIRE(s.derive());
  CHECK(s.nx == 2);
  CHECK(s.ny == 1);
  CHECK(s.nz == 1);
  CHECK(s.nth == 2);
  CHECK(s.ntv == 2);

  ImportanceField f = make_field(s.m, 1.0);
  // spatial block 0: psi = {1, 2, 3, 4}; block 1: all 0.5
  f.psi = {1.0, 2.0, 3.0, 4.0, 0.5, 0.5, 0.5, 0.5};
  const std::vector<double> mean = angular_mean(f, s);
  REQUIRE(mean.size() == 2);
  CHECK(mean[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(0.5).epsilon(1e-15));
}
