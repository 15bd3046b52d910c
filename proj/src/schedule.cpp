#include "cidx/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cidx/errors.hpp"

namespace cidx {

DiscountCurve DiscountCurve::flat(double rate) {
    DiscountCurve c;
    c.rate_ = rate;
    return c;
}

DiscountCurve DiscountCurve::from_points(std::vector<std::pair<double, double>> points) {
    std::sort(points.begin(), points.end());
    DiscountCurve c;
    c.times_.push_back(0.0);
    c.log_df_.push_back(0.0);
    for (const auto& [t, d] : points) {
        require(d > 0.0, "discount factors must be positive");
        if (t <= 0.0) continue;
        require(t > c.times_.back(), "discount curve times must be distinct");
        c.times_.push_back(t);
        c.log_df_.push_back(std::log(d));
    }
    require(c.times_.size() >= 2, "discount curve needs a point after time 0");
    return c;
}

double DiscountCurve::df(double t) const {
    if (times_.empty()) return std::exp(-rate_ * t);
    if (t <= 0.0) return 1.0;
    size_t i = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin();
    if (i >= times_.size()) i = times_.size() - 1;  // extrapolate the last forward
    const double t0 = times_[i - 1], t1 = times_[i];
    const double w = (t - t0) / (t1 - t0);
    return std::exp(log_df_[i - 1] + w * (log_df_[i] - log_df_[i - 1]));
}

LegSchedule LegSchedule::from(double t) const {
    LegSchedule out;
    for (const auto& p : periods) {
        if (p.end <= t) continue;
        Period q = p;
        if (q.start < t) {
            q.accrual *= (q.end - t) / (q.end - q.start);
            q.start = t;
        }
        out.periods.push_back(q);
    }
    return out;
}

void LegSchedule::validate() const {
    require(!periods.empty(), "schedule has no periods");
    double prev = periods.front().start;
    require(prev >= 0.0, "schedule starts before valuation");
    for (const auto& p : periods) {
        require(p.start == prev && p.end > p.start, "schedule periods must be contiguous and increasing");
        require(p.accrual > 0.0, "accrual fractions must be positive");
        prev = p.end;
    }
}

LegSchedule regular_schedule(double T, int frequency) {
    require(T > 0.0 && frequency > 0, "schedule needs positive maturity and frequency");
    const double step = 1.0 / frequency;
    std::vector<double> ends;
    for (double e = T; e > 1e-9; e -= step) ends.push_back(e);
    std::reverse(ends.begin(), ends.end());
    LegSchedule s;
    double start = 0.0;
    for (double e : ends) {
        s.periods.push_back({start, e, e, e - start});
        start = e;
    }
    return s;
}

Date parse_date(const std::string& iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        fail(ErrorCode::SchemaError, "bad date '" + iso + "', expected YYYY-MM-DD");
    Date out{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!out.ok()) fail(ErrorCode::SchemaError, "invalid calendar date '" + iso + "'");
    return out;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
    return buf;
}

DayCount parse_day_count(const std::string& s) {
    if (s == "ACT/365F" || s == "ACT/365") return DayCount::Act365F;
    if (s == "ACT/360") return DayCount::Act360;
    fail(ErrorCode::SchemaError, "unknown day count '" + s + "'");
}

double year_fraction(const Date& a, const Date& b, DayCount dc) {
    const auto days = (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
    return days / (dc == DayCount::Act360 ? 360.0 : 365.0);
}

LegSchedule dated_schedule(const Date& valuation, const Date& maturity, int frequency, DayCount accrual_dc) {
    require(frequency == 1 || frequency == 2 || frequency == 4 || frequency == 12, "unsupported coupon frequency");
    require(std::chrono::sys_days{maturity} > std::chrono::sys_days{valuation}, "maturity must follow valuation");
    const std::chrono::months step{12 / frequency};
    std::vector<Date> dates;
    for (int i = 0;; ++i) {
        Date d = maturity - step * i;
        if (!d.ok()) d = d.year() / d.month() / std::chrono::last;
        if (std::chrono::sys_days{d} <= std::chrono::sys_days{valuation}) break;
        dates.push_back(d);
    }
    std::reverse(dates.begin(), dates.end());
    LegSchedule s;
    Date prev = valuation;
    for (const auto& d : dates) {
        Period p;
        p.start = year_fraction(valuation, prev, DayCount::Act365F);
        p.end = year_fraction(valuation, d, DayCount::Act365F);
        p.pay = p.end;
        p.accrual = year_fraction(prev, d, accrual_dc);
        s.periods.push_back(p);
        prev = d;
    }
    return s;
}

}  // namespace cidx
