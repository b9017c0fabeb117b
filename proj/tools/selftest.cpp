#include "selftest.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "aicau/acquisition.hpp"
#include "aicau/cobias.hpp"
#include "aicau/linalg.hpp"
#include "aicau/rng.hpp"

namespace aicau::tools {

namespace {

// Random discrete distribution: support values and probabilities.
struct Discrete {
  Eigen::VectorXd values;
  Eigen::VectorXd probs;
};

Discrete random_discrete(Rng& rng, int size) {
  Discrete d{Eigen::VectorXd(size), Eigen::VectorXd(size)};
  for (int i = 0; i < size; ++i) {
    d.values(i) = 4.0 * rng.uniform() - 2.0;
    d.probs(i) = rng.uniform() + 0.05;
  }
  d.probs /= d.probs.sum();
  return d;
}

double mean(const Discrete& d) { return d.probs.dot(d.values); }
double variance(const Discrete& d) {
  const double m = mean(d);
  return d.probs.dot((d.values.array() - m).square().matrix());
}

bool bias_variance(Rng& rng) {
  for (int t = 0; t < 200; ++t) {
    const Discrete f = random_discrete(rng, 2 + static_cast<int>(rng.index(6)));
    const Discrete y = random_discrete(rng, 2 + static_cast<int>(rng.index(6)));
    double expected = 0.0;
    for (Eigen::Index a = 0; a < f.values.size(); ++a) {
      for (Eigen::Index b = 0; b < y.values.size(); ++b) {
        const double e = f.values(a) - y.values(b);
        expected += f.probs(a) * y.probs(b) * e * e;
      }
    }
    const double delta = mean(f) - mean(y);
    if (std::abs(expected - (variance(f) + delta * delta + variance(y))) > 1e-10) return false;
  }
  return true;
}

bool trace_identity(Rng& rng) {
  const int n = 100;
  Eigen::MatrixXd members(5, n);
  for (Eigen::Index i = 0; i < members.size(); ++i) members.data()[i] = rng.normal();
  Eigen::VectorXd delta(n);
  for (int i = 0; i < n; ++i) delta(i) = rng.normal();
  const SymMatrix omega =
      assemble_omega(sigma_F_from_members(members), direct_delta_to_matrix(delta),
                     SymMatrix::Zero(n, n))
          .omega;
  const auto eig = sym_eigen(omega);
  if (std::abs(omega.trace() - eig.values.sum()) > 1e-8 * n) return false;
  return numerical_rank(eig.values) <= 5;
}

// Dyadic values keep every sum exact, so the cancellation holds bitwise.
double dyadic(Rng& rng) { return std::ldexp(static_cast<double>(rng.index(1u << 20)), -20); }

bool aleatoric_cancellation(Rng& rng) {
  const int n = 50;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd e0(n), e1(n), b0(n), b1(n), y(n);
    for (int i = 0; i < n; ++i) {
      e0(i) = dyadic(rng);
      e1(i) = dyadic(rng);
      b0(i) = dyadic(rng);
      b1(i) = dyadic(rng);
      y(i) = dyadic(rng);
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd reducible =
        kappa(TauVector::from_components(e0, b0, zero).reducible,
              TauVector::from_components(e1, b1, zero).reducible);
    const Eigen::VectorXd full = kappa(TauVector::from_components(e0, b0, y).tau,
                                       TauVector::from_components(e1, b1, y).tau);
    if (reducible != full) return false;
  }
  return true;
}

bool eigen_rank_one(Rng& rng) {
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.index(49));
    Eigen::VectorXd delta(n);
    for (int i = 0; i < n; ++i) delta(i) = rng.normal();
    Eigen::Index expected = 0;
    delta.cwiseAbs().maxCoeff(&expected);
    const auto pick = select_batch_eigen(delta * delta.transpose(), 1,
                                         std::vector<bool>(static_cast<std::size_t>(n), true));
    if (pick.indices.front() != expected) return false;
  }
  return true;
}

}  // namespace

int run_selftest(std::ostream& out) {
  Rng rng(20240501);
  const std::vector<std::pair<std::string, std::function<bool(Rng&)>>> checks = {
      {"bias-variance identity", bias_variance},
      {"aleatoric cancellation", aleatoric_cancellation},
      {"trace and rank of omega", trace_identity},
      {"rank-one eigen selection", eigen_rank_one},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    const bool ok = check(rng);
    failures += ok ? 0 : 1;
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
  }
  return failures;
}

}  // namespace aicau::tools
