#pragma once

namespace blp {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Regularized incomplete beta function I_x(a, b).
double regularized_beta(double a, double b, double x);

/// P(chi2_df > x). Throws std::domain_error for x < 0 or df < 1.
double chi_square_upper_tail(double x, double df);
/// Upper-tail critical value: the x with P(chi2_df > x) = alpha.
double chi_square_critical_value(double alpha, double df);

/// P(F_{df1,df2} > x). Throws std::domain_error for x < 0 or df < 1.
double f_upper_tail(double x, double df1, double df2);

/// P(|T_df| > |t|).
double student_t_two_sided(double t, double df);
/// P(|Z| > |z|) for a standard normal Z.
double normal_two_sided(double z);

}  // namespace blp
