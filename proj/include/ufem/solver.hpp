#pragma once

#include <cstdint>
#include <vector>

#include "ufem/assembly.hpp"

namespace ufem {

struct SolverConfig {
  double rel_tol = 1e-10;
  int64_t max_iter = -1;  // -1 = 10 * n
};

struct SolveResult {
  std::vector<double> x;  // solution, or best iterate on failure
  int64_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients for the SPD Galerkin system.
SolveResult solve_spd(const CsrMatrix& A, const std::vector<double>& b,
                      const SolverConfig& cfg = {});

}  // namespace ufem
