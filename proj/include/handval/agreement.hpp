#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace handval {

/// Bland-Altman analysis of paired measurements: bias, spread of the
/// differences, and the 1.96-SD limits of agreement. Differences are y - x.
struct BlandAltman {
    double bias = 0.0;
    double sd_diff = 0.0;
    double loa_low = 0.0;
    double loa_high = 0.0;
    double pct_within = 0.0; // inclusive count of pairs inside the limits
    std::size_t pairs = 0;
    std::vector<std::pair<double, double>> points; // (mean, diff) per pair, plot-ready
};

enum class CoefficientKind { ICC, CCC };

struct AgreementCoefficient {
    double value = 0.0;
    double ci_low = -1.0;
    double ci_high = 1.0;
    CoefficientKind kind = CoefficientKind::CCC;
    std::optional<double> p_value; // ICC only
    bool high_agreement = false;   // value >= 0.75 (ICC) / 0.8 (CCC)
};

BlandAltman bland_altman(const std::vector<double>& x, const std::vector<double>& y);

/// Lin's concordance correlation coefficient with population-moment
/// estimators (n denominator):
///
///     CCC = 2*cov(x,y) / (var(x) + var(y) + (mean(x) - mean(y))^2)
///
/// The 95% CI uses the Fisher z-transform with Lin's asymptotic standard
/// error.
AgreementCoefficient ccc(const std::vector<double>& x, const std::vector<double>& y);

/// Two-way random-effects, absolute-agreement, single-rater intraclass
/// correlation from the two-way ANOVA decomposition, with the F-based 95%
/// confidence interval and the MSR/MSE significance test p-value.
AgreementCoefficient icc(const std::vector<double>& x, const std::vector<double>& y);

struct AgreementReport {
    std::string parameter;
    BlandAltman ba;
    AgreementCoefficient icc_coeff;
    AgreementCoefficient ccc_coeff;
    std::size_t pairs_dropped = 0; // listwise NaN removal
};

/// All three statistics for one parameter. Pairs with a non-finite value on
/// either side are dropped listwise and counted.
AgreementReport agreement_report(const std::string& parameter, std::vector<double> x,
                                 std::vector<double> y);

} // namespace handval
