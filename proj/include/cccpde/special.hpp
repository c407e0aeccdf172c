#pragma once

namespace cccpde {

/// ln Gamma(x) for x > 0 (Lanczos, g = 7, nine coefficients). Throws
/// DomainError for x <= 0 or non-finite x.
double log_gamma(double x);

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
double log_beta(double a, double b);

}  // namespace cccpde
