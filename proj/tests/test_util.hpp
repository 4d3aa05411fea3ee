#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <random>

#include "eilscond/densela.hpp"
#include "eilscond/genrand.hpp"
#include "eilscond/problem.hpp"

namespace eilscond::test {

inline MatrixXd randn(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  MatrixXd out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = nd(gen);
  return out;
}

template <typename DA, typename DB>
double rel_err(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const double den = std::max(b.norm(), 1e-300);
  return (a - b).norm() / den;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// A small well-conditioned random EILS problem from the generator.
inline GeneratedProblem small_problem(std::uint64_t seed, Index p = 8, Index q = 4, Index n = 6, Index s = 2,
                                      double omega = 0.1, double kappaA = 10) {
  GenSpec g;
  g.p = p;
  g.q = q;
  g.n = n;
  g.s = s;
  g.kappaA_target = kappaA;
  g.kappaB = 2;
  g.omega = omega;
  g.seed = seed;
  return gen_problem(g);
}

}  // namespace eilscond::test
