#pragma once

#include <cmath>

namespace lcorder {

/// Neumaier-compensated running sum.
///
/// Tracks the low-order bits lost by each addition and folds them back in on
/// read. Unlike plain Kahan summation it stays exact when an addend is larger
/// in magnitude than the running sum, which happens in divergence sums whose
/// terms change sign.
class CompensatedSum
{
public:
    constexpr CompensatedSum() = default;
    constexpr explicit CompensatedSum(double initial) : sum_{initial} {}

    constexpr CompensatedSum& operator+=(double value)
    {
        double const t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            compensation_ += (sum_ - t) + value;
        } else {
            compensation_ += (value - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    constexpr CompensatedSum& operator-=(double value) { return *this += -value; }

    [[nodiscard]] constexpr double value() const { return sum_ + compensation_; }
    constexpr explicit operator double() const { return value(); }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

} // namespace lcorder
