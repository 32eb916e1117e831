#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "edgeloc/cones.hpp"
#include "edgeloc/rng.hpp"

using namespace edgeloc;

namespace {

Eigen::MatrixXd random_symmetric(int dim, Rng& rng) {
  Eigen::MatrixXd M(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) M(r, c) = rng.uniform(-2.0, 2.0);
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd random_psd(int dim, Rng& rng) {
  Eigen::MatrixXd G(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) G(r, c) = rng.uniform(-1.0, 1.0);
  return G * G.transpose();
}

}  // namespace

TEST_CASE("svec of the identity") {
  const Eigen::VectorXd v = svec(Eigen::Matrix4d::Identity());
  REQUIRE(v.size() == 10);
  for (int c = 0, t = 0; c < 4; ++c)
    for (int r = 0; r <= c; ++r, ++t) CHECK(v[t] == (r == c ? 1.0 : 0.0));
}

TEST_CASE("svec/smat round trip") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng.next_u64() % 6);
    const Eigen::MatrixXd M = random_symmetric(dim, rng);
    const Eigen::MatrixXd back = smat(svec(M));
    CHECK((back - M).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("svec preserves the trace inner product") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + static_cast<int>(rng.next_u64() % 4);
    const Eigen::MatrixXd A = random_symmetric(dim, rng);
    const Eigen::MatrixXd B = random_symmetric(dim, rng);
    const double direct = (A * B).trace();
    const double via_svec = svec(A).dot(svec(B));
    CHECK(std::abs(direct - via_svec) <= 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("svec rejects bad input") {
  CHECK_THROWS(svec(Eigen::MatrixXd::Zero(2, 3)));
  Eigen::Matrix2d M;
  M << 0, 1, -1, 0;
  CHECK_THROWS(svec(M));
  CHECK_THROWS(smat(Eigen::VectorXd::Zero(5)));  // not a triangular number
}

TEST_CASE("project_psd clips negative eigenvalues") {
  const Eigen::Vector4d diag(3.0, -2.0, 0.0, 1.0);
  const Eigen::MatrixXd P = project_psd(diag.asDiagonal().toDenseMatrix());
  const Eigen::Vector4d expected(3.0, 0.0, 0.0, 1.0);
  CHECK((P - Eigen::MatrixXd(expected.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("project_psd is the identity on the cone") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd Q = random_psd(4, rng);
    CHECK((project_psd(Q) - Q).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("project_psd is idempotent") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd M = random_symmetric(4, rng);
    const Eigen::MatrixXd P = project_psd(M);
    CHECK((project_psd(P) - P).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("project_psd dominates sampled PSD points") {
  Rng rng(11);
  const Eigen::MatrixXd M = random_symmetric(4, rng);
  const double best = (M - project_psd(M)).norm();
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd Q = random_psd(4, rng) * rng.uniform(0.0, 3.0);
    CHECK(best <= (M - Q).norm() + 1e-12);
  }
}

TEST_CASE("project_psd rejects NaN") {
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  M(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(project_psd(M));
}

TEST_CASE("project_cones handles each cone segment") {
  ConeLayout cones;
  cones.zero = 2;
  cones.nonneg = 2;
  cones.psd = {4};

  SUBCASE("all-zero input stays zero") {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(cones.rows());
    CHECK(project_cones(s, cones).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("zero rows vanish, nonnegative rows clip, PSD block projects") {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(cones.rows());
    s[0] = 5.0;
    s[1] = -3.0;
    s[2] = -1.0;
    s[3] = 2.0;
    Eigen::Vector4d diag(1.0, -1.0, 0.0, 0.0);
    s.tail(10) = svec(diag.asDiagonal().toDenseMatrix());
    const Eigen::VectorXd out = project_cones(s, cones);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK(out[3] == 2.0);
    const Eigen::Vector4d clipped(1.0, 0.0, 0.0, 0.0);
    CHECK((out.tail(10) - svec(clipped.asDiagonal().toDenseMatrix()))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
  }

  SUBCASE("length mismatch throws") {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(cones.rows() + 1);
    CHECK_THROWS(project_cones(s, cones));
  }
}
