#pragma once

// Discount curves, calendar dates and premium-leg schedules.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace cidx {

class DiscountCurve {
public:
    static DiscountCurve flat(double rate);
    // (time in years, discount factor) pairs; log-linear interpolation, flat forward extrapolation.
    static DiscountCurve from_points(std::vector<std::pair<double, double>> points);

    double df(double t) const;
    double df(double t, double T) const { return df(T) / df(t); }

private:
    double rate_ = 0.0;
    std::vector<double> times_;
    std::vector<double> log_df_;
};

struct Period {
    double start = 0.0;  // accrual start, years from valuation
    double end = 0.0;
    double pay = 0.0;
    double accrual = 0.0;  // year fraction under the accrual day count
    double mid() const { return 0.5 * (start + end); }
};

struct LegSchedule {
    std::vector<Period> periods;
    double maturity() const { return periods.empty() ? 0.0 : periods.back().end; }
    // Periods ending after t, with the first one cut at t (forward-starting legs).
    LegSchedule from(double t) const;
    void validate() const;
};

// Regular schedule with `frequency` periods a year, rolled back from T; the first period may be short.
LegSchedule regular_schedule(double T, int frequency = 4);

using Date = std::chrono::year_month_day;

enum class DayCount { Act365F, Act360 };

Date parse_date(const std::string& iso);
std::string format_date(const Date& d);
DayCount parse_day_count(const std::string& s);
double year_fraction(const Date& a, const Date& b, DayCount dc);

// Quarterly (or other frequency) coupon dates rolled back from maturity; accrual starts at valuation.
// Times are ACT/365F from valuation; accruals use `accrual_dc`.
LegSchedule dated_schedule(const Date& valuation, const Date& maturity, int frequency, DayCount accrual_dc);

}  // namespace cidx
