#pragma once

// Continued-fraction arithmetic and the Diophantine / Brjuno / condition-H
// classifications of rotation numbers.
//
// Numbers enter as partial quotients, never as floats. Convergents are exact
// big integers while every quotient is a machine integer; generated rules whose
// quotients outgrow any integer (a_{n+1} = round(e^{a_n}) and friends) carry
// only ln(a_n), and everything downstream works with logarithms.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace circlelab::arith {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kUnbounded = std::numeric_limits<int>::max();

/// One partial quotient a_n >= 1. `exact` is set whenever a_n fits in 63 bits.
struct Quotient {
    std::optional<std::uint64_t> exact;
    double log_value = 0.0;  // ln(a_n), always finite for an available quotient

    double as_double() const;  // may be +inf for log-only quotients
};

enum class TailKind { finite, periodic, generated };

/// Programmatic quotient rules. `param` is the exponent c where one applies.
enum class Rule {
    exp_round,         // a_{n+1} = round(e^{a_n})
    exp_power,         // a_{n+1} = ceil(e^{a_n^c}),            0 < c < 1
    log_q_power,       // a_{n+1} = max(1, round(e^{(ln q_n)^c} / q_n))
    brjuno_divergent,  // a_{n+1} = round(e^{n q_n})
};

std::string rule_name(Rule rule);
Rule rule_from_name(const std::string& name);

struct TailSpec {
    TailKind kind = TailKind::finite;
    int start = 0;   // periodic: 1-based index of the first repeated quotient
    int period = 0;  // periodic: length of the repeated block
    Rule rule = Rule::exp_round;
    std::uint64_t a1 = 1;  // generated: first quotient
    double param = 0.5;    // generated: exponent c
};

class ContinuedFraction {
public:
    /// Known prefix of an irrational number; depth is the prefix length.
    static ContinuedFraction finite(std::vector<std::uint64_t> quotients);
    /// quotients[start-1 .. start-1+period-1] repeat forever.
    static ContinuedFraction periodic(std::vector<std::uint64_t> quotients, int start, int period);
    static ContinuedFraction generated(Rule rule, std::uint64_t a1, double param = 0.5);

    static ContinuedFraction golden_mean() { return periodic({1}, 1, 1); }
    static ContinuedFraction silver_mean() { return periodic({2}, 1, 1); }

    /// a_n for n >= 1. Throws DepthExhausted past available_depth().
    Quotient quotient(int n) const;
    /// Largest n for which a_n is representable (kUnbounded for periodic tails).
    int available_depth() const;

    /// G^m(alpha) = [0; a_{m+1}, a_{m+2}, ...] by backward recursion.
    double gauss_iterate(int m) const;
    /// ln(1 / G^m(alpha)) = ln(a_{m+1} + G^{m+1}(alpha)), overflow-free.
    double log_inv_gauss_iterate(int m) const;
    double value() const { return gauss_iterate(0); }

    const TailSpec& tail() const { return tail_; }
    /// Stored quotients: the full prefix (finite), the seed block (periodic),
    /// or the cached expansion (generated; exact entries only).
    const std::vector<Quotient>& stored() const { return stored_; }

private:
    ContinuedFraction() = default;
    std::vector<Quotient> stored_;
    TailSpec tail_;
};

struct Convergent {
    int index = 0;
    std::optional<BigInt> p;  // exact while every quotient so far is exact
    std::optional<BigInt> q;
    double log_q = 0.0;       // always available
};

// -- operations -------------------------------------------------------------

/// Expands x in (0,1) by the Gauss map. Throws RationalDetected if an iterate
/// falls below the rounding noise accumulated so far (4 eps q_n^2).
ContinuedFraction cf_expand(double x, int depth);

/// Convergents p_k/q_k for k = 1..n (clamped to the available depth).
std::vector<Convergent> convergents(const ContinuedFraction& cf, int n);

struct DiophantineEstimate {
    double gamma_hat = 0.0;     // min_k q_k^{2+s} |alpha - p_k/q_k|
    int attained_at = 0;
    double gamma_liminf = 0.0;  // min over the second half of the range
    int depth = 0;              // effective depth used
};
DiophantineEstimate diophantine_estimate(const ContinuedFraction& cf, double sigma, int depth);

struct BrjunoSum {
    double value = 0.0;
    bool diverging = false;
    int depth = 0;
    std::vector<double> terms;  // ln(q_{n+1}) / q_n, n = 1..depth-1
};
inline constexpr int kDivergenceWindow = 3;
inline constexpr double kDivergenceThreshold = 1.0;
BrjunoSum brjuno_sum(const ContinuedFraction& cf, int depth);

/// Truncated Brjuno function by the floating Gauss map.
double brjuno_function(double x, int depth);

struct BrjunoValue {
    double value = 0.0;       // truncated sum, a lower bound (all terms positive)
    double tail_bound = 0.0;  // beta_{d-1} * b_max
    int terms = 0;
};
/// B(G^m(alpha)) computed from quotients in log form.
BrjunoValue brjuno_function(const ContinuedFraction& cf, int m, int depth, double b_max);

/// The piecewise map R_alpha(r).
double r_alpha(double alpha, double r);
/// Same map with alpha given through ln(1/alpha); stays finite where alpha^{-1} does not.
double r_alpha_log(double log_inv_alpha, double r);

struct HConfig {
    int m_max = 10;
    int k_max = 20;
    int b_depth = 30;
    double b_max = 10.0;
};

enum class HKind { pass_to_depth, fail_at, inconclusive };
std::string to_string(HKind kind);

struct HRecord {
    int m = 0;
    bool passed = false;
    int pass_k = -1;            // first k with R_k >= B upper bound
    int k_evaluated = 0;        // number of k values compared
    double min_margin = 0.0;    // min_k (B_lower - R_k) over evaluated k
    double max_tail = 0.0;      // largest B truncation bound seen
    bool certified_fail = false;
};

struct HVerdict {
    HKind kind = HKind::inconclusive;
    int fail_m = -1;
    int m_max = 0;  // last m of the unbroken passing run (fail_at: the failing m)
    int k_max = 0;
    int b_depth = 0;
    std::vector<HRecord> records;
};

/// Truncated condition-H check. Throws NotBrjuno when the Brjuno sum is
/// flagged divergent.
HVerdict condition_h_check(const ContinuedFraction& cf, const HConfig& config);

struct ClassifyConfig {
    double sigma = 1.0;
    double gamma_floor = 1e-6;
    int diophantine_depth = 30;
    int brjuno_depth = 40;
    HConfig h;
};

struct ArithmeticVerdict {
    bool diophantine = false;
    DiophantineEstimate dio;
    double sigma = 0.0;
    double gamma_floor = 0.0;
    BrjunoSum brjuno;
    BrjunoValue brjuno_b;
    HVerdict h;
    bool not_brjuno = false;          // H check skipped: sum divergent
    bool consistency_adjusted = false;  // a fail_at was downgraded next to a Diophantine pass
    ClassifyConfig config;
};

ArithmeticVerdict classify(const ContinuedFraction& cf, const ClassifyConfig& config = {});

}  // namespace circlelab::arith
