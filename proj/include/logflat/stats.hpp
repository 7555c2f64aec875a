#pragma once

namespace logflat::stats {

// Regularized lower and upper incomplete gamma, P(a, x) + Q(a, x) = 1.
// Series below x < a + 1, Lentz continued fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
// dof = 0 is treated as a point mass at zero (p = 1).
double chi_square_sf(double statistic, double dof);

}  // namespace logflat::stats
