#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace hnhpp {

/// Neumaier-compensated running sum. Long likelihood sums (tens of thousands of
/// terms) keep full precision and stay independent of term magnitudes' order.
class CompensatedSum
{
  public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            compensation_ += (sum_ - t) + x;
        else
            compensation_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x)
    {
        add(x);
        return *this;
    }
    double value() const { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// log(exp(a) - exp(b)) for a >= b.
inline double log_diff_exp(double a, double b)
{
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    return a + std::log(-std::expm1(b - a));
}

/// log(exp(a) + exp(b)).
inline double log_sum_exp(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    return a + std::log1p(std::exp(b - a));
}

} // namespace hnhpp
