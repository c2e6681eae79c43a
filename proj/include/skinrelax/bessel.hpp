#pragma once

namespace skin {

struct LogBessel {
    double log_abs; // log |J_n(x)|, -inf for an exact zero
    int sign;       // sign of J_n(x)
};

// J_n(x) for integer n >= 0 and x >= 0 in log form. The power series is used while
// x^2/4 < n + 1, where the leading (x/2)^n / n! factor would underflow first.
LogBessel log_bessel_j(int n, double x);

// ln|J_n(x)| - n ln(x/2), i.e. the part left after pulling out the small-argument power.
// Only valid in the series regime (x^2/4 < n + 1); returns false otherwise.
bool log_bessel_reduced(int n, double x, double& reduced, int& sign);

} // namespace skin
