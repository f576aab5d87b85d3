#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

namespace useembed {

// How lambda is applied: norm-ball constraints on the columns of W and U, or
// Frobenius penalties lambda*(||W||_F^2 + ||U||_F^2) as in the plain
// large-margin baseline.
enum class RegMode { constraint, penalty };

std::string to_string(RegMode mode);
RegMode reg_mode_from_string(const std::string& s);

struct Hyperparams {
  int d_e = 32;           // embedding dimension
  double lambda = 10.0;   // column norm bound (constraint) or ridge weight (penalty)
  double mu1 = 1.0;       // weight of the supercategory + attribute losses
  double mu2 = 1.0;       // weight of the semantic regularizer
  double gamma1 = 1.0;    // box bound on reconstruction weights
  double gamma2 = 0.1;    // exclusivity weight
  double sigma = 1.0;     // attribute correlation margin
  int outer_iters = 20;   // alternation rounds
  int inner_iters = 10;   // descent steps inside each sub-problem
  double tol = 1e-5;      // relative objective change for early stopping
  std::uint64_t seed = 0;
  RegMode reg_mode = RegMode::constraint;

  // Attribute columns obey both the global lambda bound and the unit bound.
  double attr_norm_bound() const { return std::min(lambda, 1.0); }

  void validate() const;
};

}  // namespace useembed
