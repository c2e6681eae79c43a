#include "skinrelax/bessel.hpp"

#include <cmath>
#include <limits>

namespace skin {

bool log_bessel_reduced(int n, double x, double& reduced, int& sign)
{
    const double q = 0.25 * x * x;
    if (!(q < n + 1.0))
        return false;
    // sum_k (-q)^k / (k! (n+1)_k)
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= -q / (static_cast<double>(k) * (n + k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum))
            break;
    }
    sign = sum < 0.0 ? -1 : 1;
    reduced = std::log(std::abs(sum)) - std::lgamma(n + 1.0);
    return true;
}

LogBessel log_bessel_j(int n, double x)
{
    const double ninf = -std::numeric_limits<double>::infinity();
    if (x == 0.0)
        return n == 0 ? LogBessel{0.0, 1} : LogBessel{ninf, 1};
    double reduced = 0.0;
    int sign = 1;
    if (log_bessel_reduced(n, x, reduced, sign))
        return {reduced + n * std::log(0.5 * x), sign};
    const double v = std::cyl_bessel_j(static_cast<double>(n), x);
    if (v == 0.0)
        return {ninf, 1};
    return {std::log(std::abs(v)), v < 0.0 ? -1 : 1};
}

} // namespace skin
