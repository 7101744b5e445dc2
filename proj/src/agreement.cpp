#include "handval/agreement.hpp"

#include "handval/errors.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace handval {

namespace {

constexpr double kLoaMultiplier = 1.96; // conventional 95% limits of agreement
constexpr double kNormalQuantile975 = 1.959963984540054;
constexpr double kIccHighAgreement = 0.75;
constexpr double kCccHighAgreement = 0.8;

void require_pairs(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_n) {
    if (x.size() != y.size())
        throw LengthMismatchError(fmt::format("paired vectors differ in length: {} vs {}",
                                              x.size(), y.size()));
    if (x.size() < min_n)
        throw TooFewPairsError(fmt::format("{} pairs given, at least {} required", x.size(), min_n));
}

struct Moments {
    double mean_x = 0, mean_y = 0;
    double var_x = 0, var_y = 0; // population (n denominator)
    double cov = 0;
};

Moments population_moments(const std::vector<double>& x, const std::vector<double>& y) {
    Moments m;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.mean_x += x[i];
        m.mean_y += y[i];
    }
    m.mean_x /= n;
    m.mean_y /= n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - m.mean_x;
        const double dy = y[i] - m.mean_y;
        m.var_x += dx * dx;
        m.var_y += dy * dy;
        m.cov += dx * dy;
    }
    m.var_x /= n;
    m.var_y /= n;
    m.cov /= n;
    return m;
}

} // namespace

BlandAltman bland_altman(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 3);
    const std::size_t n = x.size();

    BlandAltman ba;
    ba.pairs = n;
    ba.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = y[i] - x[i];
        ba.points.emplace_back(0.5 * (x[i] + y[i]), diff);
        ba.bias += diff;
    }
    ba.bias /= static_cast<double>(n);

    double ss = 0.0;
    for (const auto& [mean, diff] : ba.points) ss += (diff - ba.bias) * (diff - ba.bias);
    ba.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
    ba.loa_low = ba.bias - kLoaMultiplier * ba.sd_diff;
    ba.loa_high = ba.bias + kLoaMultiplier * ba.sd_diff;

    std::size_t within = 0;
    for (const auto& [mean, diff] : ba.points)
        if (diff >= ba.loa_low && diff <= ba.loa_high) ++within;
    ba.pct_within = 100.0 * static_cast<double>(within) / static_cast<double>(n);
    return ba;
}

AgreementCoefficient ccc(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 3);
    const auto m = population_moments(x, y);
    if (m.var_x == 0.0 || m.var_y == 0.0)
        throw DegenerateInputError("concordance undefined for a zero-variance input");

    const double n = static_cast<double>(x.size());
    const double mean_gap = m.mean_x - m.mean_y;
    const double value = 2.0 * m.cov / (m.var_x + m.var_y + mean_gap * mean_gap);
    const double r = m.cov / std::sqrt(m.var_x * m.var_y);

    AgreementCoefficient out;
    out.kind = CoefficientKind::CCC;
    out.value = std::clamp(value, -1.0, 1.0);
    out.high_agreement = out.value >= kCccHighAgreement;

    // Lin's asymptotic SE of the estimate, propagated through Fisher's z.
    const double p = out.value;
    if (std::abs(p) >= 1.0 - 1e-15 || n <= 2) {
        out.ci_low = out.ci_high = out.value;
        return out;
    }
    const double u = (m.mean_y - m.mean_x) / std::pow(m.var_x * m.var_y, 0.25);
    const double r2 = r * r;
    double se2 = 0.0;
    if (r2 > 0.0) {
        se2 = ((1.0 - r2) * p * p * (1.0 - p * p) / r2 +
               2.0 * p * p * p * (1.0 - p) * u * u / r -
               0.5 * p * p * p * p * u * u * u * u / r2) /
              (n - 2.0);
    }
    if (!(se2 > 0.0) || !std::isfinite(se2)) {
        out.ci_low = -1.0;
        out.ci_high = 1.0;
        return out;
    }
    const double z = std::atanh(p);
    const double se_z = std::sqrt(se2) / (1.0 - p * p);
    out.ci_low = std::clamp(std::tanh(z - kNormalQuantile975 * se_z), -1.0, 1.0);
    out.ci_high = std::clamp(std::tanh(z + kNormalQuantile975 * se_z), -1.0, 1.0);
    out.ci_low = std::min(out.ci_low, out.value);
    out.ci_high = std::max(out.ci_high, out.value);
    return out;
}

AgreementCoefficient icc(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 3);
    const double n = static_cast<double>(x.size());
    constexpr double k = 2.0; // two systems rate every segment

    double grand = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) grand += x[i] + y[i];
    grand /= (n * k);
    const double col_x = [&] {
        double s = 0.0;
        for (double v : x) s += v;
        return s / n;
    }();
    const double col_y = [&] {
        double s = 0.0;
        for (double v : y) s += v;
        return s / n;
    }();

    double ss_rows = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double row_mean = 0.5 * (x[i] + y[i]);
        ss_rows += (row_mean - grand) * (row_mean - grand);
        ss_total += (x[i] - grand) * (x[i] - grand) + (y[i] - grand) * (y[i] - grand);
    }
    ss_rows *= k;
    const double ss_cols = n * ((col_x - grand) * (col_x - grand) + (col_y - grand) * (col_y - grand));
    const double ss_err = std::max(0.0, ss_total - ss_rows - ss_cols);

    const double msr = ss_rows / (n - 1.0);
    const double msc = ss_cols / (k - 1.0);
    const double mse = ss_err / ((n - 1.0) * (k - 1.0));

    if (msr <= 0.0)
        throw DegenerateInputError("between-subject variance is zero, ICC undefined");

    const double denom = msr + (k - 1.0) * mse + k * (msc - mse) / n;
    AgreementCoefficient out;
    out.kind = CoefficientKind::ICC;
    out.value = denom != 0.0 ? (msr - mse) / denom : 1.0;
    out.value = std::clamp(out.value, -1.0, 1.0);
    out.high_agreement = out.value >= kIccHighAgreement;

    const double df_rows = n - 1.0;
    const double df_err = (n - 1.0) * (k - 1.0);
    if (mse > 0.0) {
        const boost::math::fisher_f f_test(df_rows, df_err);
        out.p_value = boost::math::cdf(boost::math::complement(f_test, msr / mse));
    } else {
        out.p_value = 0.0;
    }

    // F-based interval with Satterthwaite degrees of freedom.
    if (mse == 0.0 && msc == 0.0) {
        out.ci_low = out.ci_high = out.value;
        return out;
    }
    const double icc_v = out.value;
    const double a_over_b = k * icc_v / (n * (1.0 - icc_v) + k * icc_v * (n - 1.0));
    double v_df;
    if (!std::isfinite(a_over_b)) {
        v_df = k - 1.0;
    } else {
        const double num = a_over_b * msc + mse;
        const double den = (a_over_b * msc) * (a_over_b * msc) / (k - 1.0) + mse * mse / df_err;
        v_df = den > 0.0 ? num * num / den : k - 1.0;
    }
    v_df = std::max(v_df, 1.0);
    try {
        const boost::math::fisher_f f_low(df_rows, v_df);
        const boost::math::fisher_f f_up(v_df, df_rows);
        const double fl = boost::math::quantile(f_low, 0.975);
        const double fu = boost::math::quantile(f_up, 0.975);
        const double cross = k * msc + (k * n - k - n) * mse;
        out.ci_low = n * (msr - fl * mse) / (fl * cross + n * msr);
        out.ci_high = n * (fu * msr - mse) / (cross + n * fu * msr);
    } catch (const std::exception&) {
        out.ci_low = -1.0;
        out.ci_high = 1.0;
    }
    out.ci_low = std::clamp(std::min(out.ci_low, out.value), -1.0, 1.0);
    out.ci_high = std::clamp(std::max(out.ci_high, out.value), -1.0, 1.0);
    return out;
}

AgreementReport agreement_report(const std::string& parameter, std::vector<double> x,
                                 std::vector<double> y) {
    if (x.size() != y.size())
        throw LengthMismatchError(fmt::format("paired vectors differ in length: {} vs {}",
                                              x.size(), y.size()));
    std::vector<double> xs, ys;
    xs.reserve(x.size());
    ys.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(x[i]) && std::isfinite(y[i])) {
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
    }
    AgreementReport report;
    report.parameter = parameter;
    report.pairs_dropped = x.size() - xs.size();
    report.ba = bland_altman(xs, ys);
    report.icc_coeff = icc(xs, ys);
    report.ccc_coeff = ccc(xs, ys);
    return report;
}

} // namespace handval
