#include <algorithm>
#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spfdi/estimator.hpp"

using namespace spfdi;

namespace {

SystemModel model_with(const Matrix& A) {
  return SystemModel(A, fixture::paper_C(), 0.01 * Matrix::Identity(3, 3), 0.1 * Matrix::Identity(2, 2),
                     Matrix::Identity(3, 3));
}

// Model whose innovation covariance S = C X C^T + R is exactly diag(s) for X = 0.
SystemModel scalar_channel(double s) {
  return SystemModel(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 2), s * Matrix::Identity(2, 2),
                     Matrix::Zero(2, 2));
}

double min_eig(const Matrix& x) { return Eigen::SelfAdjointEigenSolver<Matrix>(x).eigenvalues().minCoeff(); }

}  // namespace

TEST(OpH, Examples) {
  const auto model = fixture::paper_model();
  EXPECT_LT(max_abs(op_h(Matrix::Zero(3, 3), model) - model.Q()), 1e-15);

  SystemModel ident(Matrix::Identity(3, 3), fixture::paper_C(), Matrix::Zero(3, 3), 0.1 * Matrix::Identity(2, 2),
                    Matrix::Identity(3, 3));
  fixture::Gen gen(1);
  const Matrix X = gen.psd(3);
  EXPECT_LT(max_abs(op_h(X, ident) - X), 1e-14);

  const Matrix A = model.A();
  const Matrix want = oracle::naive_product(oracle::naive_product(A, Matrix::Identity(3, 3)), A.transpose()) + model.Q();
  EXPECT_LT(max_abs(op_h(Matrix::Identity(3, 3), model) - want), 1e-15);
  EXPECT_THROW(op_h(Matrix::Identity(2, 2), model), DomainError);
}

TEST(OpQTilde, Examples) {
  const auto model = fixture::paper_model();
  fixture::Gen gen(2);
  const Matrix X = gen.psd(3);
  EXPECT_LT(max_abs(op_q_tilde(X, 0.0, model) - X), 1e-15);
  EXPECT_LT(max_abs(op_q_tilde(Matrix::Zero(3, 3), 0.7, model)), 1e-15);
}

TEST(OpQTilde, MonotoneInLambda) {
  const auto model = fixture::paper_model();
  fixture::Gen gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix X = gen.psd(3);
    const double lambda = gen.uniform(0.0, 1.0);
    const Matrix full = op_q_tilde(X, 1.0, model);
    const Matrix part = op_q_tilde(X, lambda, model);
    EXPECT_GE(min_eig(part - full), -1e-10);
    EXPECT_GE(min_eig(X - part), -1e-10);
  }
}

TEST(OpQTilde, MatchesNaiveFormula) {
  const auto model = fixture::paper_model();
  fixture::Gen gen(4);
  const Matrix X = gen.psd(3);
  const Matrix C = model.C();
  const Matrix S = oracle::naive_product(oracle::naive_product(C, X), C.transpose()) + model.R();
  const Matrix XCt = oracle::naive_product(X, C.transpose());
  const Matrix want = X - 0.3 * oracle::naive_product(oracle::naive_product(XCt, oracle::naive_inverse(S)), XCt.transpose());
  EXPECT_LT(max_abs(op_q_tilde(X, 0.3, model) - want), 1e-12);
}

TEST(MahalanobisFactor, Examples) {
  EXPECT_LT(max_abs(mahalanobis_factor(Matrix::Zero(2, 2), scalar_channel(1.0)) - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(mahalanobis_factor(Matrix::Zero(2, 2), scalar_channel(4.0)) - 0.5 * Matrix::Identity(2, 2)), 1e-15);

  const auto model = fixture::paper_model();
  const auto steady = riccati_fixed_point(model);
  const Matrix F = mahalanobis_factor(steady.P, model);
  EXPECT_LT(max_abs(F * F.transpose() - oracle::naive_inverse(steady.S)), 1e-10);
  // F^{-T} is the lower Cholesky factor of S.
  EXPECT_LT(max_abs(steady.F_inv_T * steady.F_inv_T.transpose() - steady.S), 1e-14);
  EXPECT_LT(max_abs(steady.F.transpose() * steady.F_inv_T - Matrix::Identity(2, 2)), 1e-14);
}

TEST(TimeUpdate, Examples) {
  const auto model = fixture::paper_model();
  FilterState s = initial_filter_state(model);
  s.x_post = Vector::Zero(3);
  EXPECT_EQ(time_update(s, model).x_prior, Vector::Zero(3));

  const auto steady = riccati_fixed_point(model);
  FilterState post = initial_filter_state(model);
  post.P_post = steady.P_post(model);
  EXPECT_LT(max_abs(time_update(post, model).P_prior - steady.P), 1e-9);

  fixture::Gen gen(5);
  post.x_post = gen.normal(3);
  post.P_post = gen.psd(3);
  const auto next = time_update(post, model);
  const Matrix A = model.A();
  EXPECT_LT((next.x_prior - oracle::naive_product(A, post.x_post)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix Pw = oracle::naive_product(oracle::naive_product(A, post.P_post), A.transpose()) + model.Q();
  EXPECT_LT(max_abs(next.P_prior - Pw), 1e-12);
  const Matrix S = oracle::naive_product(oracle::naive_product(model.C(), Pw), model.C().transpose()) + model.R();
  const Matrix K = oracle::naive_product(oracle::naive_product(Pw, model.C().transpose()), oracle::naive_inverse(S));
  EXPECT_LT(max_abs(next.K - K), 1e-12);
  EXPECT_LT(max_abs(next.F * next.F.transpose() - oracle::naive_inverse(S)), 1e-10);
}

TEST(Innovation, Examples) {
  const auto model = fixture::paper_model();
  fixture::Gen gen(6);
  const Vector x = gen.normal(3);
  EXPECT_LT(innovation(model.C() * x, x, model).cwiseAbs().maxCoeff(), 1e-15);
  const Vector y = gen.normal(2), d = gen.normal(2);
  EXPECT_LT((innovation(y + d, x, model) - innovation(y, x, model) - d).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TransformInnovation, Examples) {
  fixture::Gen gen(7);
  const Matrix F = gen.psd(2);
  EXPECT_EQ(transform_innovation(Vector::Zero(2), F), Vector::Zero(2));
  const Vector z = gen.normal(2);
  EXPECT_EQ(transform_innovation(z, Matrix::Identity(2, 2)), z);
}

TEST(Schedule, BoundaryAndExamples) {
  EXPECT_FALSE(schedule(Vector::Zero(2), 1.4));
  Vector e(2);
  e << -1.4, 0.3;
  EXPECT_FALSE(schedule(e, 1.4));
  e << 0.2, std::nextafter(1.4, 2.0);
  EXPECT_TRUE(schedule(e, 1.4));
  EXPECT_THROW(schedule(e, -0.1), DomainError);
}

TEST(MeasurementUpdate, Examples) {
  const auto model = fixture::paper_model();
  fixture::Gen gen(8);
  FilterState s = initial_filter_state(model);
  s.P_prior = gen.psd(3);
  detail::refresh_gains(s, model);
  s.x_prior = gen.normal(3);
  const Vector z = gen.normal(2);
  const Vector eps = transform_innovation(z, s.F);

  const auto open = measurement_update(s, eps, false, 1.4, model);
  EXPECT_EQ(open.x_post, s.x_prior);
  EXPECT_LT(max_abs(open.P_post - op_q_tilde(s.P_prior, specfun::kappa(1.4), model)), 1e-15);

  const auto closed = measurement_update(s, eps, true, 1.4, model);
  EXPECT_LT((closed.x_post - (s.x_prior + s.K * z)).cwiseAbs().maxCoeff(), 1e-12);

  const auto a = measurement_update(s, eps, false, 0.0, model);
  const auto b = measurement_update(s, eps, true, 0.0, model);
  EXPECT_EQ(a.P_post, b.P_post);
}

TEST(RiccatiFixedPoint, Examples) {
  const auto zero_a = model_with(Matrix::Zero(3, 3));
  const auto ss = riccati_fixed_point(zero_a);
  EXPECT_LT(max_abs(ss.P - zero_a.Q()), 1e-15);
  EXPECT_LE(ss.iterations, 2);

  const auto model = fixture::paper_model();
  const auto steady = riccati_fixed_point(model);
  EXPECT_LT(max_abs(steady.P - op_h(op_q_tilde(steady.P, model), model)), 1e-11);
  const Matrix S = model.C() * steady.P * model.C().transpose() + model.R();
  const Matrix K = oracle::naive_product(steady.P * model.C().transpose(), oracle::naive_inverse(S));
  EXPECT_LT(max_abs(steady.K - K), 1e-10);
}

TEST(RiccatiFixedPoint, ReportsDivergence) {
  // Unobservable unstable mode: (A, C) is not detectable.
  Matrix A = Matrix::Identity(3, 3) * 1.2;
  Matrix C = Matrix::Zero(2, 3);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  SystemModel model(A, C, 0.01 * Matrix::Identity(3, 3), 0.1 * Matrix::Identity(2, 2), Matrix::Identity(3, 3));
  EXPECT_THROW(riccati_fixed_point(model), DivergenceError);
}

TEST(Filter, AlwaysTransmittingConvergesToRiccati) {
  const auto model = fixture::paper_model();
  const auto steady = riccati_fixed_point(model);
  FilterState s = initial_filter_state(model);
  for (int k = 0; k < 200; ++k) {
    if (k > 0) s = time_update(s, model);
    s = measurement_update(s, Vector::Zero(2), true, 1.4, model);
  }
  s = time_update(s, model);
  EXPECT_LT(max_abs(s.P_prior - steady.P), 1e-9);
}

namespace {

struct LoopStats {
  Vector mean, var;
  double z_over_s = 0.0;
  double lag1 = 0.0;
  double rate = 0.0;
  double min_update_eig = 0.0;
};

LoopStats nominal_loop(double beta, std::uint64_t seed, int N) {
  const auto model = fixture::paper_model();
  RandomSource rng(seed, 0);
  PlantState plant = sample_initial_state(model, rng);
  FilterState f = initial_filter_state(model);
  const int burn = 200;
  Vector mean = Vector::Zero(2), sq = Vector::Zero(2);
  double z_tr = 0.0, s_tr = 0.0, lag = 0.0, prev = 0.0, worst = 0.0;
  long triggers = 0;
  for (int k = 0; k < burn + N; ++k) {
    if (k > 0) f = time_update(f, model);
    const auto r = step(model, plant, rng);
    const Vector z = innovation(r.measurement, f.x_prior, model);
    const Vector eps = transform_innovation(z, f.F);
    const bool gamma = schedule(eps, beta);
    const Matrix P_prior = f.P_prior;
    f = measurement_update(f, eps, gamma, beta, model);
    worst = std::min(worst, min_eig(P_prior - f.P_post));
    if (k >= burn) {
      mean += eps;
      sq += eps.cwiseProduct(eps);
      z_tr += z.squaredNorm();
      s_tr += f.S.trace();
      if (k > burn) lag += eps[0] * prev;
      prev = eps[0];
      triggers += gamma;
    }
    plant = r.next;
  }
  LoopStats out;
  out.mean = mean / N;
  out.var = sq / N - out.mean.cwiseProduct(out.mean);
  out.z_over_s = z_tr / s_tr;
  out.lag1 = (lag / (N - 1) - out.mean[0] * out.mean[0]) / out.var[0];
  out.rate = static_cast<double>(triggers) / N;
  out.min_update_eig = worst;
  return out;
}

}  // namespace

TEST(Filter, NominalClosedLoopStatistics) {
  const int N = 100000;
  const auto s = nominal_loop(1.4, 2024, N);
  EXPECT_GE(s.min_update_eig, -1e-10);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(s.mean[i]), 0.02);
    EXPECT_GE(s.var[i], 0.97);
    EXPECT_LE(s.var[i], 1.03);
  }
  EXPECT_NEAR(s.z_over_s, 1.0, 0.05);
  const double p = 1.0 - std::pow(1.0 - 2.0 * specfun::gaussian_q(1.4), 2.0);
  EXPECT_LT(std::abs(s.rate - p), 3.0 * std::sqrt(p * (1.0 - p) / N));
  // Skipped corrections leave the prior error in the next innovation: eps is
  // positively correlated at lag 1 (about 0.05 here).
  EXPECT_GT(s.lag1, 4.0 / std::sqrt(static_cast<double>(N)));
  EXPECT_LT(s.lag1, 0.1);
}

TEST(Filter, AlwaysTransmittingInnovationIsWhite) {
  const int N = 100000;
  const auto s = nominal_loop(0.0, 2025, N);
  EXPECT_EQ(s.rate, 1.0);
  EXPECT_LT(std::abs(s.lag1), 4.0 / std::sqrt(static_cast<double>(N)));
  EXPECT_NEAR(s.z_over_s, 1.0, 0.05);
}
