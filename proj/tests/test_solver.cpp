#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "edgeloc/cones.hpp"
#include "edgeloc/formulation.hpp"
#include "edgeloc/solver.hpp"
#include "test_util.hpp"

using namespace edgeloc;
using namespace edgeloc::testutil;

namespace {

// min y  s.t.  y >= 1, written as  -y + s = -1, s in R+
ConicProgram one_dim_lp() {
  ConicProgram prog;
  prog.A.resize(1, 1);
  prog.A.insert(0, 0) = -1.0;
  prog.A.makeCompressed();
  prog.b = Eigen::VectorXd::Constant(1, -1.0);
  prog.c = Eigen::VectorXd::Constant(1, 1.0);
  prog.cones.nonneg = 1;
  return prog;
}

// min tr(C X)  s.t.  tr(X) = 1, X >= 0, with C = diag(3, 1)
ConicProgram min_eigenvalue_sdp() {
  Eigen::Matrix2d C;
  C << 3.0, 0.0, 0.0, 1.0;
  ConicProgram prog;
  prog.c = svec(C);
  std::vector<Eigen::Triplet<double>> trip;
  const Eigen::VectorXd id = svec(Eigen::Matrix2d::Identity());
  for (int t = 0; t < 3; ++t) {
    trip.emplace_back(0, t, id[t]);  // tr(X) = 1
    trip.emplace_back(1 + t, t, -1.0);  // s = svec(X)
  }
  prog.A.resize(4, 3);
  prog.A.setFromTriplets(trip.begin(), trip.end());
  prog.b = Eigen::VectorXd::Zero(4);
  prog.b[0] = 1.0;
  prog.cones.zero = 1;
  prog.cones.psd = {2};
  return prog;
}

}  // namespace

TEST_CASE("one-dimensional LP reaches the closed-form optimum") {
  SolveSettings settings;
  settings.tolerance = 1e-9;
  const SolveResult result = solve(one_dim_lp(), settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  CHECK(result.y[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.lambda[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.primal_objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(result.dual_objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("minimum-eigenvalue SDP reaches lambda_min(C)") {
  SolveSettings settings;
  settings.tolerance = 1e-8;
  const SolveResult result = solve(min_eigenvalue_sdp(), settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  CHECK(result.primal_objective == doctest::Approx(1.0).epsilon(1e-6));
  // optimal X is the eigenvector outer product e2 e2'
  const Eigen::MatrixXd X = smat(result.y);
  CHECK(X(0, 0) == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(X(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("zero-noise trilateration solves to objective zero") {
  const Network net = trilateration_network();
  auto [prog, map] = build_esdp(exact_measurement(net));
  SolveSettings settings;
  settings.tolerance = 1e-8;
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  CHECK(result.primal_objective <= 1e-6);
}

TEST_CASE("optimal solves satisfy the KKT conditions") {
  const Network net = cluster_network(5, 3);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 4);
  auto [prog, map] = build_pesdp(mn, 0.1);
  const SolveResult result = solve(prog);
  REQUIRE(result.status == SolveStatus::Optimal);

  const double tol = 1e-6;
  CHECK(result.primal_residual <= tol);
  CHECK(result.dual_residual <= tol);
  CHECK(result.gap <= tol);

  // cone membership of the slack is exact by construction
  CHECK(result.s.head(prog.cones.zero).cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.s.segment(prog.cones.zero, prog.cones.nonneg).minCoeff() >= 0.0);
  // dual cone membership within tolerance
  CHECK(result.lambda.segment(prog.cones.zero, prog.cones.nonneg).minCoeff() >=
        -tol);
  for (std::size_t blk = 0; blk < prog.cones.psd.size(); ++blk) {
    const Eigen::MatrixXd S = smat(result.lambda.segment(
        prog.cones.psd_start(blk), svec_size(prog.cones.psd[blk])));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    CHECK(eig.eigenvalues().minCoeff() >= -tol * (1.0 + S.norm()));
  }

  // complementary slackness and weak duality
  const double cs = std::abs(result.s.dot(result.lambda));
  CHECK(cs <= 10.0 * tol * (1.0 + result.s.norm() * result.lambda.norm()));
  CHECK(result.primal_objective >=
        result.dual_objective - 10.0 * tol * (1.0 + std::abs(result.dual_objective)));
}

TEST_CASE("solves are bit-identical across runs") {
  const Network net = cluster_network(6, 9);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 11);
  auto [prog, map] = build_esdp(mn);
  const SolveResult a = solve(prog);
  const SolveResult b = solve(prog);
  CHECK(a.iterations == b.iterations);
  CHECK(a.y == b.y);
  CHECK(a.s == b.s);
  CHECK(a.lambda == b.lambda);
  CHECK(a.primal_objective == b.primal_objective);
}

TEST_CASE("iteration cap yields MaxIterations") {
  SolveSettings settings;
  settings.max_iterations = 3;
  const SolveResult result = solve(min_eigenvalue_sdp(), settings);
  CHECK(result.status == SolveStatus::MaxIterations);
  CHECK(result.iterations == 3);
}

TEST_CASE("time limit yields TimeLimit") {
  const Network net = cluster_network(6, 13);
  const MeasuredNetwork mn = apply_noise(net, 0.2, 5);
  auto [prog, map] = build_esdp(mn);
  SolveSettings settings;
  settings.tolerance = 1e-14;  // unreachable
  settings.time_limit_seconds = 0.05;
  const SolveResult result = solve(prog, settings);
  CHECK(result.status == SolveStatus::TimeLimit);
}

TEST_CASE("equilibration does not change the optimum") {
  const Network net = cluster_network(5, 21);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 7);
  auto [prog, map] = build_pesdp(mn, 0.1);
  SolveSettings plain;
  plain.equilibrate = false;
  const SolveResult with_eq = solve(prog);
  const SolveResult without_eq = solve(prog, plain);
  REQUIRE(with_eq.status == SolveStatus::Optimal);
  REQUIRE(without_eq.status == SolveStatus::Optimal);
  CHECK(with_eq.primal_objective ==
        doctest::Approx(without_eq.primal_objective).epsilon(1e-4));
}

TEST_CASE("structurally singular KKT systems are reported") {
  // a variable that appears nowhere, with no proximal regularization
  ConicProgram prog;
  prog.A.resize(1, 2);
  prog.A.insert(0, 0) = 1.0;
  prog.A.makeCompressed();
  prog.b = Eigen::VectorXd::Constant(1, 1.0);
  prog.c = Eigen::VectorXd::Zero(2);
  prog.cones.zero = 1;
  SolveSettings settings;
  settings.sigma = 0.0;
  settings.equilibrate = false;
  CHECK_THROWS_WITH_AS(solve(prog, settings), doctest::Contains("equilibration"),
                       std::runtime_error);
}

TEST_CASE("an infeasible program is flagged as suspected infeasible") {
  // y = 0 and y = 1 simultaneously
  ConicProgram prog;
  std::vector<Eigen::Triplet<double>> trip = {{0, 0, 1.0}, {1, 0, 1.0}};
  prog.A.resize(2, 1);
  prog.A.setFromTriplets(trip.begin(), trip.end());
  prog.b = Eigen::VectorXd::Zero(2);
  prog.b[1] = 1.0;
  prog.c = Eigen::VectorXd::Zero(1);
  prog.cones.zero = 2;
  const SolveResult result = solve(prog);
  CHECK(result.status == SolveStatus::InfeasibleSuspected);
}

TEST_CASE("NaN data is rejected") {
  ConicProgram prog = one_dim_lp();
  prog.b[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(solve(prog));
}

TEST_CASE("settings are validated") {
  const ConicProgram prog = one_dim_lp();
  SolveSettings s;
  s.tolerance = 0.0;
  CHECK_THROWS(solve(prog, s));
  s = {};
  s.over_relaxation = 2.5;
  CHECK_THROWS(solve(prog, s));
  s = {};
  s.rho = -1.0;
  CHECK_THROWS(solve(prog, s));
}
