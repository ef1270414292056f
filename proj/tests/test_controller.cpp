#include "angleaware/controller.hpp"

#include "angleaware/field.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace angleaware;

namespace {

std::vector<Cell> small_patch() {
  GridSpec s;
  s.x_min = -0.3;
  s.x_max = 0.3;
  s.y_min = -0.3;
  s.y_max = 0.3;
  s.z_min = 0.0;
  s.z_max = 0.1;
  s.res_x = 0.1;
  s.res_y = 0.1;
  s.res_z = 0.1;
  s.res_th = kPi / 2.0;
  s.res_tv = kPi / 6.0;
  REQUIRE(s.derive());
  return build_grid(s);
}

std::vector<double> ramp_psi(std::size_t m) {
  std::vector<double> psi(m);
  for (std::size_t j = 0; j < m; ++j)
    psi[j] = 0.2 + 0.8 * static_cast<double>(j % 7) / 6.0;
  return psi;
}

CbfTerms reference_terms(const DroneState& s, const std::vector<Cell>& cells,
                         const std::vector<double>& psi,
                         const ControllerParams& pr, const CameraParams& cam) {
  CbfTerms t;
  double sp = 0.0, sp2 = 0.0;
  Eigen::Vector4d sg = Eigen::Vector4d::Zero();
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const double p = perf(s, cells[j], cam);
    const PerfGradient g = perf_gradient(s, cells[j], cam);
    sp += p * psi[j];
    sp2 += p * p * psi[j];
    const double wgt = pr.xi1_extra_perf ? p * psi[j] : psi[j];
    sg += wgt * g.g;
    t.guarded = t.guarded || g.guarded;
  }
  t.I_i = pr.delta * sp;
  t.xi1 = pr.delta * sg;
  t.xi2 = -pr.a1 * pr.gamma / pr.n + pr.a1 * pr.delta * sp -
          pr.delta * pr.delta * sp2;
  const double mid = 0.5 * (pr.phi_min + pr.phi_max);
  const double range = pr.phi_max - pr.phi_min;
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -2.0 * (s.phi_v - mid));
  t.b_phi = range * range - (s.phi_v - mid) * (s.phi_v - mid);
  t.chi2 = pr.a2 * t.b_phi;
  t.b_I = t.I_i - pr.gamma / pr.n;
  return t;
}

}  // namespace

TEST_CASE("coverage_contribution is the weighted perf sum") {
  const std::vector<Cell> cells = small_patch();
  const std::vector<double> psi = ramp_psi(cells.size());
  const CameraParams cam;
  const DroneState s(0.12, -0.07, 1.1, 1.2, 1.0);

  double expect = 0.0;
  for (std::size_t j = 0; j < cells.size(); ++j)
    expect += perf(s, cells[j], cam) * psi[j];
  expect *= 5.0;

  CHECK(coverage_contribution(s, cells, psi, 5.0, cam) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(coverage_contribution(s, {}, {}, 5.0, cam) == 0.0);
}

TEST_CASE("cbf_terms matches the definition term by term") {
  const std::vector<Cell> cells = small_patch();
  const std::vector<double> psi = ramp_psi(cells.size());
  const CameraParams cam;
  ControllerParams pr;
  pr.n = 4;

  for (const bool extra : {false, true}) {
    pr.xi1_extra_perf = extra;
    const DroneState s(0.05, 0.11, 0.7, 1.3, 1.0);
    const CbfTerms got = cbf_terms(s, cells, psi, pr, cam);
    const CbfTerms want = reference_terms(s, cells, psi, pr, cam);

    CHECK(got.I_i == doctest::Approx(want.I_i).epsilon(1e-12));
    CHECK((got.xi1 - want.xi1).lpNorm<Eigen::Infinity>() <=
          1e-12 * std::max(1.0, want.xi1.lpNorm<Eigen::Infinity>()));
    CHECK(got.xi2 == doctest::Approx(want.xi2).epsilon(1e-12));
    CHECK(got.chi1[3] == doctest::Approx(want.chi1[3]).epsilon(1e-12));
    CHECK(got.chi2 == doctest::Approx(want.chi2).epsilon(1e-12));
    CHECK(got.b_I == doctest::Approx(want.b_I).epsilon(1e-12));
    CHECK(got.b_phi == doctest::Approx(want.b_phi).epsilon(1e-12));
    CHECK(got.guarded == want.guarded);
  }
}

TEST_CASE("xi1 is the gradient of the coverage contribution") {
  const std::vector<Cell> cells = small_patch();
  const std::vector<double> psi = ramp_psi(cells.size());
  const CameraParams cam;
  ControllerParams pr;

  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const DroneState s(0.4 * u(rng), 0.4 * u(rng), kPi * (u(rng) + 1.0),
                       0.4 + 0.5 * (u(rng) + 1.0), 1.0);
    const CbfTerms t = cbf_terms(s, cells, psi, pr, cam);
    if (t.guarded) continue;

    Eigen::Vector4d fd;
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      DroneState sp = s, sm = s;
      double* fp[4] = {&sp.x, &sp.y, &sp.phi_h, &sp.phi_v};
      double* fm[4] = {&sm.x, &sm.y, &sm.phi_h, &sm.phi_v};
      *fp[k] += h;
      *fm[k] -= h;
      fd[k] = (coverage_contribution(sp, cells, psi, pr.delta, cam) -
               coverage_contribution(sm, cells, psi, pr.delta, cam)) /
              (2.0 * h);
    }
    const double scale = std::max(fd.lpNorm<Eigen::Infinity>(), 1e-9);
    CHECK((t.xi1 - fd).lpNorm<Eigen::Infinity>() / scale < 1e-5);
  }
}

TEST_CASE("gimbal barrier terms at characteristic angles") {
  ControllerParams pr;
  pr.a2 = 2.0;
  const double mid = 0.5 * (pr.phi_min + pr.phi_max);
  const double range = pr.phi_max - pr.phi_min;
  const CameraParams cam;

  // centered gimbal: chi1 vanishes, b_phi is the full squared range
  const CbfTerms c = cbf_terms(DroneState(0, 0, 0, mid, 1.0), {}, {}, pr, cam);
  CHECK(c.chi1[3] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(c.b_phi == doctest::Approx(range * range).epsilon(1e-12));
  CHECK(c.chi2 == doctest::Approx(2.0 * range * range).epsilon(1e-12));

  // at the upper limit the margin shrinks to 3/4 of the squared range
  const CbfTerms e =
      cbf_terms(DroneState(0, 0, 0, pr.phi_max, 1.0), {}, {}, pr, cam);
  CHECK(e.b_phi == doctest::Approx(0.75 * range * range).epsilon(1e-12));
  CHECK(e.chi1[3] == doctest::Approx(-range).epsilon(1e-12));

  // empty cell set: xi2 reduces to the constant draw-down term
  CHECK(c.xi2 == doctest::Approx(-pr.a1 * pr.gamma / pr.n).epsilon(1e-12));
  CHECK(c.b_I == doctest::Approx(-pr.gamma / pr.n).epsilon(1e-12));
}

TEST_CASE("assemble_cbf_terms matches cbf_terms given the raw sums") {
  const std::vector<Cell> cells = small_patch();
  const std::vector<double> psi = ramp_psi(cells.size());
  const CameraParams cam;
  ControllerParams pr;
  const DroneState s(-0.1, 0.02, 2.0, 1.0, 1.0);

  CbfAccum acc;
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const double p = perf(s, cells[j], cam);
    const PerfGradient g = perf_gradient(s, cells[j], cam);
    acc.sum_perf_psi += p * psi[j];
    acc.sum_perf2_psi += p * p * psi[j];
    for (int k = 0; k < 4; ++k) acc.xi1_sum[k] += g.g[k] * psi[j];
    acc.owned += 1;
    acc.guarded = acc.guarded || g.guarded;
  }

  const CbfTerms a = assemble_cbf_terms(s, acc, pr);
  const CbfTerms b = cbf_terms(s, cells, psi, pr, cam);
  CHECK(a.I_i == doctest::Approx(b.I_i).epsilon(1e-12));
  CHECK(a.xi2 == doctest::Approx(b.xi2).epsilon(1e-12));
  CHECK((a.xi1 - b.xi1).lpNorm<Eigen::Infinity>() <=
        1e-12 * std::max(1.0, b.xi1.lpNorm<Eigen::Infinity>()));
  CHECK(a.chi2 == b.chi2);
  CHECK(a.b_phi == b.b_phi);
}

TEST_CASE("control_step returns exact zero at hover") {
  ControllerParams pr;
  CbfTerms t;
  t.xi1 = Eigen::Vector4d(0.01, -0.02, 0.005, 0.0);
  t.xi2 = 0.3;  // decay rate already satisfied
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -0.1);
  t.chi2 = 1.5;

  const ControlResult r = control_step(DroneState(), t, pr);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.u.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r.w == 0.0);
  CHECK(!r.slack_violating);
  CHECK(!r.box_active);
  CHECK(r.active.empty());
}

TEST_CASE("active coverage row follows the closed form") {
  ControllerParams pr;  // epsilon = 1e-4
  CbfTerms t;
  t.xi1 = Eigen::Vector4d(0.004, -0.003, 0.002, 0.001);
  t.xi2 = -2e-4;
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -0.167);
  t.chi2 = 1.7;

  // single active row (xi1, -1): lam = -2 xi2 / (|xi1|^2/eps + 1)
  const double n2 = t.xi1.squaredNorm();
  const double lam = -2.0 * t.xi2 / (n2 / pr.epsilon + 1.0);
  const Eigen::Vector4d want_u = lam / (2.0 * pr.epsilon) * t.xi1;
  const double want_w = -lam / 2.0;

  const ControlResult r = control_step(DroneState(), t, pr);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK((r.u - want_u).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(r.w == doctest::Approx(want_w).epsilon(1e-8));
  CHECK(r.slack_violating);  // w < 0
  CHECK(!r.box_active);
  REQUIRE(r.active.size() == 1);
  CHECK(r.active[0] == 0);
  CHECK(r.kkt_residual <= 1e-8);
}

TEST_CASE("velocity bounds saturate under a strong pull") {
  ControllerParams pr;
  CbfTerms t;
  t.xi1 = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
  t.xi2 = -10.0;
  t.chi1 = Eigen::Vector4d::Zero();
  t.chi2 = 1.0;

  const ControlResult r = control_step(DroneState(), t, pr);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.u[0] == doctest::Approx(pr.vmax_xy).epsilon(1e-9));
  CHECK(std::abs(r.u[1]) < 1e-9);
  CHECK(std::abs(r.u[2]) < 1e-9);
  CHECK(std::abs(r.u[3]) < 1e-9);
  CHECK(r.w == doctest::Approx(pr.vmax_xy - 10.0).epsilon(1e-8));
  CHECK(r.box_active);
  CHECK(r.slack_violating);
}

TEST_CASE("gimbal row steers phi_v away from the barrier") {
  ControllerParams pr;
  CbfTerms t;
  t.xi1 = Eigen::Vector4d::Zero();
  t.xi2 = 0.5;  // coverage satisfied
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -1.0);
  t.chi2 = -0.2;  // outside the barrier: must push u_phi_v negative

  const ControlResult r = control_step(DroneState(), t, pr);
  REQUIRE(r.status == QpStatus::Optimal);
  // active gimbal row: -u3 - 0.2 >= 0 -> u3 <= -0.2, minimum norm u3 = -0.2
  CHECK(r.u[3] == doctest::Approx(-0.2).epsilon(1e-8));
  CHECK(r.w == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fixed-baseline mode moves only in the plane") {
  ControllerParams pr;
  CbfTerms t;
  t.xi1 = Eigen::Vector4d(0.004, -0.003, 0.02, 0.01);  // gimbal part ignored
  t.xi2 = -2e-4;
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -0.1);
  t.chi2 = 1.7;

  const double n2 = t.xi1.head<2>().squaredNorm();
  const double lam = -2.0 * t.xi2 / (n2 / pr.epsilon + 1.0);

  const ControlResult r =
      control_step(DroneState(), t, pr, ControlMode::FixedBaseline);
  REQUIRE(r.status == QpStatus::Optimal);
  CHECK(r.u[0] == doctest::Approx(lam / (2.0 * pr.epsilon) * t.xi1[0]).epsilon(1e-8));
  CHECK(r.u[1] == doctest::Approx(lam / (2.0 * pr.epsilon) * t.xi1[1]).epsilon(1e-8));
  CHECK(r.u[2] == 0.0);
  CHECK(r.u[3] == 0.0);
  CHECK(r.w == doctest::Approx(-lam / 2.0).epsilon(1e-8));
}

TEST_CASE("parameter validation") {
  ControllerParams bad;
  bad.gamma = 0.0;
  CHECK(!bad.valid());
  CHECK_THROWS_AS((void)control_step(DroneState(), CbfTerms(), bad),
                  std::invalid_argument);

  ControllerParams flip;
  flip.phi_min = 1.0;
  flip.phi_max = 0.5;
  CHECK(!flip.valid());

  ControllerParams ok;
  CHECK(ok.valid());
}
