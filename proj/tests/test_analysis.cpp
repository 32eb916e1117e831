#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>

#include "edgeloc/analysis.hpp"
#include "edgeloc/cones.hpp"
#include "edgeloc/rng.hpp"
#include "test_util.hpp"

using namespace edgeloc;
using namespace edgeloc::testutil;

namespace {

SolveResult fake_result(const Eigen::VectorXd& y, Eigen::Index rows) {
  SolveResult result;
  result.status = SolveStatus::Optimal;
  result.y = y;
  result.s = Eigen::VectorXd::Zero(rows);
  result.lambda = Eigen::VectorXd::Zero(rows);
  return result;
}

}  // namespace

TEST_CASE("positions extracted from the true vector are exact") {
  const Network net = cluster_network(5, 41);
  auto [prog, map] = build_esdp(exact_measurement(net));
  const Eigen::VectorXd y = true_solution_vector(net, map);
  const auto positions = extract_positions(fake_result(y, prog.rows()), map);
  REQUIRE(positions.size() == net.sensors.size());
  for (std::size_t j = 0; j < positions.size(); ++j)
    CHECK((positions[j] - net.sensors[j]).norm() <= 1e-15);
}

TEST_CASE("a sensor coincident with an anchor is pinned to it") {
  // the coincident anchor gives the zero-distance edge; two more anchors
  // make the linear system uniquely determined
  const Eigen::Vector2d spot(0.1, 0.1);
  const Network net =
      dense_network({spot}, {spot, {-0.2, 0.0}, {0.0, -0.25}}, 1.0);
  REQUIRE(net.anchor_edges.size() == 3);
  REQUIRE(net.anchor_true_dist[0] == 0.0);
  SolveSettings settings;
  settings.tolerance = 1e-8;
  auto [prog, map] = build_esdp(exact_measurement(net));
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  const auto positions = extract_positions(result, map);
  CHECK((positions[0] - spot).norm() <= 1e-4);
}

TEST_CASE("trilateration matches the closed-form oracle") {
  const Network net = trilateration_network();
  auto [prog, map] = build_esdp(exact_measurement(net));
  SolveSettings settings;
  settings.tolerance = 1e-8;
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  const auto positions = extract_positions(result, map);
  const Eigen::Vector2d oracle = trilaterate(net.anchors, net.anchor_true_dist);
  CHECK((positions[0] - oracle).norm() <= 1e-3);
  CHECK((oracle - net.sensors[0]).norm() <= 1e-10);  // oracle is exact here
}

TEST_CASE("position_error") {
  std::vector<Eigen::Vector2d> truth = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

  SUBCASE("zero for equal inputs") { CHECK(position_error(truth, truth) == 0.0); }

  SUBCASE("uniform shift") {
    auto shifted = truth;
    for (auto& p : shifted) p += Eigen::Vector2d(0.1, 0.0);
    CHECK(position_error(shifted, truth) == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("random instance vs direct arithmetic") {
    Rng rng(55);
    std::vector<Eigen::Vector2d> est, tru;
    double expected = 0.0;
    for (int t = 0; t < 5; ++t) {
      est.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      tru.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      expected += (est.back() - tru.back()).norm();
    }
    expected /= 5.0;
    CHECK(std::abs(position_error(est, tru) - expected) <= 1e-12);
  }

  SUBCASE("translation invariance") {
    Rng rng(56);
    std::vector<Eigen::Vector2d> est, tru;
    for (int t = 0; t < 7; ++t) {
      est.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      tru.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    }
    const double before = position_error(est, tru);
    const Eigen::Vector2d shift(0.37, -1.2);
    for (auto& p : est) p += shift;
    for (auto& p : tru) p += shift;
    CHECK(std::abs(position_error(est, tru) - before) <= 1e-12);
  }

  SUBCASE("length mismatch throws") {
    std::vector<Eigen::Vector2d> two = {{0, 0}, {1, 1}};
    CHECK_THROWS(position_error(two, truth));
  }
}

TEST_CASE("average_position_error") {
  CHECK(average_position_error({0.1}) == doctest::Approx(0.1));
  CHECK(average_position_error({0.0, 0.2}) == doctest::Approx(0.1));
  Rng rng(57);
  std::vector<double> vals;
  double sum = 0.0;
  for (int t = 0; t < 50; ++t) {
    vals.push_back(rng.uniform(0.0, 1.0));
    sum += vals.back();
  }
  CHECK(std::abs(average_position_error(vals) - sum / 50.0) <= 1e-12);
  CHECK_THROWS(average_position_error({}));
}

TEST_CASE("dual blocks are PSD and complementary at the optimum") {
  const Network net = cluster_network(5, 70);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 6);
  auto [prog, map] = build_pesdp(mn, 0.1);
  SolveSettings settings;
  settings.tolerance = 1e-8;
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::Optimal);

  const auto duals = extract_dual_blocks(result, map);
  REQUIRE(duals.size() == net.sensor_edges.size());
  for (const auto& blk : map.psd_blocks) {
    const Eigen::MatrixXd& S = duals.at({blk.i, blk.j});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-5 * (1.0 + S.norm()));
    const Eigen::MatrixXd shifted =
        map.z_block(result.y, blk) + blk.p * Eigen::MatrixXd::Identity(4, 4);
    const double cs = std::abs((shifted * S).trace());
    CHECK(cs <= 1e-5 * (1.0 + shifted.norm() * S.norm()));
  }
}

TEST_CASE("strictly feasible optima have vanishing dual blocks") {
  const Network net = cluster_network(4, 71);
  const MeasuredNetwork mn = interior_instance(net, 0.05);
  auto [prog, map] = build_esdp(mn);
  SolveSettings settings;
  settings.tolerance = 1e-8;
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::Optimal);
  CHECK(result.primal_objective <= 1e-6);
  for (const auto& [edge, S] : extract_dual_blocks(result, map))
    CHECK(S.norm() <= 1e-5);
}

TEST_CASE("extract_dual_blocks insists on an optimal solve") {
  const Network net = cluster_network(4, 72);
  auto [prog, map] = build_esdp(exact_measurement(net));
  SolveSettings settings;
  settings.max_iterations = 2;
  const SolveResult result = solve(prog, settings);
  REQUIRE(result.status == SolveStatus::MaxIterations);
  CHECK_THROWS_WITH_AS(extract_dual_blocks(result, map),
                       doctest::Contains("iteration limit"), std::runtime_error);
}

TEST_CASE("dual objective reassembles -b'lambda from the multipliers") {
  const Network net = cluster_network(5, 73);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 9);

  SUBCASE("all multipliers zero gives zero") {
    auto [prog, map] = build_esdp(mn);
    const SolveResult zero =
        fake_result(Eigen::VectorXd::Zero(map.n_vars), prog.rows());
    CHECK(evaluate_dual_objective(zero, mn, map) == 0.0);
  }

  SUBCASE("esdp: matches the solver and the primal") {
    auto [prog, map] = build_esdp(mn);
    SolveSettings settings;
    settings.tolerance = 1e-9;
    settings.max_iterations = 200000;
    const SolveResult result = solve(prog, settings);
    REQUIRE(result.status == SolveStatus::Optimal);
    const double assembled = evaluate_dual_objective(result, mn, map);
    CHECK(std::abs(assembled - result.dual_objective) <=
          1e-8 * (1.0 + std::abs(result.dual_objective)));
    CHECK(std::abs(assembled - result.primal_objective) <=
          20.0 * settings.tolerance * (1.0 + std::abs(result.primal_objective)));
  }

  SUBCASE("pesdp: the trace term enters and the optimum can only improve") {
    auto [prog_e, map_e] = build_esdp(mn);
    auto [prog_p, map_p] = build_pesdp(mn, 0.1);
    SolveSettings settings;
    settings.tolerance = 1e-8;
    const SolveResult res_e = solve(prog_e, settings);
    const SolveResult res_p = solve(prog_p, settings);
    REQUIRE(res_e.status == SolveStatus::Optimal);
    REQUIRE(res_p.status == SolveStatus::Optimal);

    const double dual_e = evaluate_dual_objective(res_e, mn, map_e);
    const double dual_p = evaluate_dual_objective(res_p, mn, map_p);
    CHECK(std::abs(dual_p - res_p.dual_objective) <=
          1e-8 * (1.0 + std::abs(res_p.dual_objective)));

    double trace_envelope = 0.0;
    for (const auto& [edge, S] : extract_dual_blocks(res_p, map_p))
      trace_envelope += 0.1 * std::abs(S.trace());
    CHECK(dual_p <= dual_e + trace_envelope + 1e-6 * (1.0 + std::abs(dual_e)));
  }
}

TEST_CASE("numerical_rank") {
  CHECK(numerical_rank(Eigen::Matrix4d::Identity()).rank == 4);
  Eigen::Vector4d diag(1.0, 1e-12, 0.0, 0.0);
  CHECK(numerical_rank(diag.asDiagonal().toDenseMatrix()).rank == 1);

  // Gram-structured block from a true planar solution has rank 2
  const Eigen::Vector2d xi(0.1, -0.2), xj(-0.15, 0.05);
  Eigen::MatrixXd block(4, 4);
  block.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity();
  block.block<2, 1>(0, 2) = xi;
  block.block<2, 1>(0, 3) = xj;
  block.bottomLeftCorner<2, 2>() = block.topRightCorner<2, 2>().transpose();
  block(2, 2) = xi.dot(xi);
  block(2, 3) = xi.dot(xj);
  block(3, 2) = xi.dot(xj);
  block(3, 3) = xj.dot(xj);
  CHECK(numerical_rank(block).rank == 2);

  Eigen::Matrix2d bad = Eigen::Matrix2d::Zero();
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(numerical_rank(bad));
  CHECK_THROWS(numerical_rank(Eigen::Matrix2d::Identity(), 2.0));
}

TEST_CASE("rank relation report") {
  using Blocks = std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>>;

  SUBCASE("zero dual blocks satisfy the trace condition at q = 2") {
    Blocks z = {{{0, 1}, Eigen::Matrix4d::Identity()}};
    Blocks s = {{{0, 1}, Eigen::Matrix4d::Zero()}};
    const auto report = rank_relation_report(z, s, 2);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].rank_s == 0);
    CHECK(report.rows[0].trace_condition_holds);
  }

  SUBCASE("a complementary rank-2 pair violates the trace condition") {
    Eigen::Vector4d dz(1.0, 1.0, 0.0, 0.0), ds(0.0, 0.0, 1.0, 1.0);
    Blocks z = {{{0, 1}, dz.asDiagonal().toDenseMatrix()}};
    Blocks s = {{{0, 1}, ds.asDiagonal().toDenseMatrix()}};
    const auto report = rank_relation_report(z, s, 2);
    CHECK(report.rows[0].rank_z == 2);
    CHECK(report.rows[0].rank_s == 2);
    CHECK_FALSE(report.rows[0].trace_condition_holds);  // needs rank(S) <= 0
    CHECK(report.rows[0].complementarity_bound_holds);  // 2 + 2 <= 4
    CHECK(!report.table().empty());
  }

  SUBCASE("solver noise below the zero floor counts as rank zero") {
    Blocks z = {{{0, 1}, Eigen::Matrix4d::Identity()}};
    Blocks s = {{{0, 1}, 1e-9 * Eigen::Matrix4d::Identity()}};
    CHECK(rank_relation_report(z, s, 2, 1e-6, 0.0).rows[0].rank_s == 4);
    CHECK(rank_relation_report(z, s, 2, 1e-6, 1e-7).rows[0].rank_s == 0);
  }

  SUBCASE("mismatched edge sets throw") {
    Blocks z = {{{0, 1}, Eigen::Matrix4d::Identity()}};
    Blocks s = {{{0, 2}, Eigen::Matrix4d::Identity()}};
    CHECK_THROWS(rank_relation_report(z, s, 2));
    Blocks empty;
    CHECK_THROWS(rank_relation_report(z, empty, 2));
  }
}

TEST_CASE("zero-noise complementarity bound holds on every edge") {
  const Network net = cluster_network(4, 74);
  auto [prog, map] = build_esdp(exact_measurement(net));
  const SolveResult result = solve(prog, tight_settings());
  REQUIRE(result.status == SolveStatus::Optimal);

  std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>> z_blocks, s_blocks;
  for (const auto& blk : map.psd_blocks) {
    z_blocks.push_back({{blk.i, blk.j}, map.z_block(result.y, blk)});
    s_blocks.push_back(
        {{blk.i, blk.j}, smat(result.lambda.segment(blk.row0, 10))});
  }
  const auto report = rank_relation_report(z_blocks, s_blocks, 2, 1e-6, 1e-7);
  for (const auto& row : report.rows) CHECK(row.complementarity_bound_holds);
}

TEST_CASE("sensitivity: flat direction on a strictly feasible instance") {
  const Network net = cluster_network(4, 75);
  const MeasuredNetwork mn = interior_instance(net, 0.05);
  const auto report = sensitivity_check(mn, 0.1, 1e-3);
  CHECK(std::abs(report.objective_at_p) <= 1e-7);
  CHECK(std::abs(report.objective_at_p_plus_step) <= 1e-7);
  CHECK(std::abs(report.dual_trace_gradient) <= 1e-5);
}

TEST_CASE("sensitivity: finite differences match the dual trace gradient") {
  const Network net = cluster_network(5, 76);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 12);
  const auto report = sensitivity_check(mn, 0.1, 1e-3);
  CHECK(report.relative_error <= 1e-2);

  const auto halved = sensitivity_check(mn, 0.1, 5e-4);
  CHECK(halved.relative_error <= report.relative_error + 1e-3);
}

TEST_CASE("sensitivity preconditions are enforced") {
  const Network net = cluster_network(4, 80);
  const MeasuredNetwork mn = apply_noise(net, 0.1, 1);
  CHECK_THROWS(sensitivity_check(mn, 0.1, 1e-7));
  CHECK_THROWS(sensitivity_check(mn, 0.1, 0.5));
  const Network big = cluster_network(12, 81);
  CHECK_THROWS(sensitivity_check(apply_noise(big, 0.1, 2), 0.1, 1e-3));
}

TEST_CASE("make_report collects blocks and serializes") {
  const Network net = cluster_network(4, 78);
  const MeasuredNetwork mn = apply_noise(net, 0.05, 3);
  auto [prog, map] = build_pesdp(mn, 0.1);
  const SolveResult result = solve(prog);
  REQUIRE(result.status == SolveStatus::Optimal);
  const LocalizationReport report = make_report(result, map, mn, "pesdp", 0.01);
  CHECK(report.blocks.size() == net.sensor_edges.size());
  CHECK(report.delta >= 0.0);
  CHECK(std::isfinite(report.trace_sum));
  const std::string path =
      (std::filesystem::temp_directory_path() / "edgeloc_report.json").string();
  save_report(report, path);
  std::remove(path.c_str());
}
