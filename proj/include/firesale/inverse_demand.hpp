#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace firesale {

/// Inverse demand function f for the single illiquid asset.
///
/// Maps the total quantity sold s ∈ [0, M] to the clearing price f(s),
/// normalized so f(0) = 1. Every family exposes analytic first and second
/// derivatives; at the endpoints of [0, M] those are the one-sided values.
class InverseDemand {
public:
    enum class Family { Linear, Exponential, Hyperbolic, Custom };

    using ScalarFn = std::function<double(double)>;

    /// f(s) = 1 - alpha s
    static InverseDemand linear(double alpha, double market_cap);
    /// f(s) = exp(-alpha s)
    static InverseDemand exponential(double alpha, double market_cap);
    /// f(s) = eps / (eps + s)
    static InverseDemand hyperbolic(double eps, double market_cap);
    /// User-supplied f with both derivatives.
    static InverseDemand custom(ScalarFn price, ScalarFn slope, ScalarFn curvature,
                                double market_cap, std::string name = "custom");

    double price(double total_sold) const;
    double slope(double total_sold) const;
    double curvature(double total_sold) const;

    Family family() const noexcept;
    /// alpha for Linear/Exponential, eps for Hyperbolic, NaN for Custom.
    double parameter() const noexcept;
    double market_cap() const noexcept { return market_cap_; }

    InverseDemand with_market_cap(double market_cap) const;
    InverseDemand with_parameter(double parameter) const;

    /// Round-trips through parse_inverse_demand for named families.
    std::string describe() const;

private:
    struct Linear { double alpha; };
    struct Exponential { double alpha; };
    struct Hyperbolic { double eps; };
    struct Custom {
        ScalarFn price;
        ScalarFn slope;
        ScalarFn curvature;
        std::string name;
    };
    using Kind = std::variant<Linear, Exponential, Hyperbolic, Custom>;

    InverseDemand(Kind kind, double market_cap);
    void check_domain(double s) const;

    Kind kind_;
    double market_cap_;
};

/// Parses `linear:alpha=<v>`, `exp:alpha=<v>` or `hyp:eps=<v>`. Values accept
/// plain decimals or a ratio such as `1/210`. Throws InvalidInput.
InverseDemand parse_inverse_demand(std::string_view spec, double market_cap);

struct ClauseCheck {
    std::string name;
    bool pass = true;
    /// Smallest margin seen on the grid (negative means violated there).
    double worst_margin = 0.0;
    double worst_location = 0.0;
};

struct Assumption1Report {
    bool pass = true;
    std::vector<ClauseCheck> clauses;

    const ClauseCheck& clause(std::string_view name) const;
};

/// Checks every clause of the standing assumption on f over [0, M].
///
/// The grid has `grid_points` equally spaced samples. For the three named
/// families the verdict of each clause comes from its closed-form condition;
/// the grid still supplies the worst location. Custom families are judged on
/// the grid alone.
Assumption1Report validate_assumption1(const InverseDemand& f, std::size_t grid_points = 10001);

struct UniquenessReport {
    bool pass = false;
    /// f'(s) + s f''(s) <= 0 on [0, M]
    bool pointwise_pass = false;
    /// -M f'(0) < nu ∧ f(M)
    bool contraction_pass = false;
    /// (nu ∧ f(M)) + M f'(0); positive when the contraction bound holds.
    double margin = 0.0;
    double worst_location = 0.0;
};

/// Sufficient conditions for a unique joint liquidation-price equilibrium.
/// Pass the stress-test haircut nu for collateralized borrowing.
UniquenessReport validate_uniqueness(const InverseDemand& f, std::optional<double> nu = std::nullopt,
                                     std::size_t grid_points = 10001);

}  // namespace firesale
