#include "firesale/inverse_demand.hpp"

#include "firesale/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace firesale {

namespace {

// Sums of clamped liquidations can overshoot M by a few ulps.
constexpr double kDomainSlack = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidInput(std::string(what) + " must be positive and finite");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text) {
    text = trim(text);
    auto parse_one = [](std::string_view t) {
        t = trim(t);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size()) {
            throw InvalidInput("cannot parse number '" + std::string(t) + "'");
        }
        return v;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        double den = parse_one(text.substr(slash + 1));
        if (den == 0.0) throw InvalidInput("zero denominator in '" + std::string(text) + "'");
        return parse_one(text.substr(0, slash)) / den;
    }
    return parse_one(text);
}

}  // namespace

InverseDemand::InverseDemand(Kind kind, double market_cap)
    : kind_(std::move(kind)), market_cap_(market_cap) {
    require_positive(market_cap_, "market capitalization M");
}

InverseDemand InverseDemand::linear(double alpha, double market_cap) {
    require_positive(alpha, "linear alpha");
    return InverseDemand(Linear{alpha}, market_cap);
}

InverseDemand InverseDemand::exponential(double alpha, double market_cap) {
    require_positive(alpha, "exponential alpha");
    return InverseDemand(Exponential{alpha}, market_cap);
}

InverseDemand InverseDemand::hyperbolic(double eps, double market_cap) {
    require_positive(eps, "hyperbolic eps");
    return InverseDemand(Hyperbolic{eps}, market_cap);
}

InverseDemand InverseDemand::custom(ScalarFn price, ScalarFn slope, ScalarFn curvature,
                                    double market_cap, std::string name) {
    if (!price || !slope || !curvature) {
        throw InvalidInput("custom inverse demand needs price, slope and curvature");
    }
    return InverseDemand(Custom{std::move(price), std::move(slope), std::move(curvature), std::move(name)},
                         market_cap);
}

void InverseDemand::check_domain(double s) const {
    const double slack = kDomainSlack * std::max(1.0, market_cap_);
    if (!(s >= -slack && s <= market_cap_ + slack)) {
        std::ostringstream msg;
        msg << "total sold " << s << " outside [0, " << market_cap_ << "]";
        throw DomainError(msg.str());
    }
}

double InverseDemand::price(double s) const {
    check_domain(s);
    return std::visit(Overloaded{
                          [s](const Linear& k) { return 1.0 - k.alpha * s; },
                          [s](const Exponential& k) { return std::exp(-k.alpha * s); },
                          [s](const Hyperbolic& k) { return k.eps / (k.eps + s); },
                          [s](const Custom& k) { return k.price(s); },
                      },
                      kind_);
}

double InverseDemand::slope(double s) const {
    check_domain(s);
    return std::visit(Overloaded{
                          [](const Linear& k) { return -k.alpha; },
                          [s](const Exponential& k) { return -k.alpha * std::exp(-k.alpha * s); },
                          [s](const Hyperbolic& k) { return -k.eps / ((k.eps + s) * (k.eps + s)); },
                          [s](const Custom& k) { return k.slope(s); },
                      },
                      kind_);
}

double InverseDemand::curvature(double s) const {
    check_domain(s);
    return std::visit(Overloaded{
                          [](const Linear&) { return 0.0; },
                          [s](const Exponential& k) { return k.alpha * k.alpha * std::exp(-k.alpha * s); },
                          [s](const Hyperbolic& k) {
                              const double d = k.eps + s;
                              return 2.0 * k.eps / (d * d * d);
                          },
                          [s](const Custom& k) { return k.curvature(s); },
                      },
                      kind_);
}

InverseDemand::Family InverseDemand::family() const noexcept {
    return std::visit(Overloaded{
                          [](const Linear&) { return Family::Linear; },
                          [](const Exponential&) { return Family::Exponential; },
                          [](const Hyperbolic&) { return Family::Hyperbolic; },
                          [](const Custom&) { return Family::Custom; },
                      },
                      kind_);
}

double InverseDemand::parameter() const noexcept {
    return std::visit(Overloaded{
                          [](const Linear& k) { return k.alpha; },
                          [](const Exponential& k) { return k.alpha; },
                          [](const Hyperbolic& k) { return k.eps; },
                          [](const Custom&) { return std::numeric_limits<double>::quiet_NaN(); },
                      },
                      kind_);
}

InverseDemand InverseDemand::with_market_cap(double market_cap) const {
    return InverseDemand(kind_, market_cap);
}

InverseDemand InverseDemand::with_parameter(double parameter) const {
    switch (family()) {
        case Family::Linear: return linear(parameter, market_cap_);
        case Family::Exponential: return exponential(parameter, market_cap_);
        case Family::Hyperbolic: return hyperbolic(parameter, market_cap_);
        case Family::Custom: break;
    }
    throw InvalidInput("custom inverse demand has no scalar parameter");
}

std::string InverseDemand::describe() const {
    std::ostringstream out;
    out.precision(17);
    std::visit(Overloaded{
                   [&](const Linear& k) { out << "linear:alpha=" << k.alpha; },
                   [&](const Exponential& k) { out << "exp:alpha=" << k.alpha; },
                   [&](const Hyperbolic& k) { out << "hyp:eps=" << k.eps; },
                   [&](const Custom& k) { out << k.name; },
               },
               kind_);
    return out.str();
}

InverseDemand parse_inverse_demand(std::string_view spec, double market_cap) {
    spec = trim(spec);
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw InvalidInput("inverse demand spec '" + std::string(spec) + "' lacks ':'");
    }
    const auto family = trim(spec.substr(0, colon));
    const auto assignment = trim(spec.substr(colon + 1));
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw InvalidInput("inverse demand spec '" + std::string(spec) + "' lacks '<key>=<value>'");
    }
    const auto key = trim(assignment.substr(0, eq));
    const double value = parse_number(assignment.substr(eq + 1));

    if ((family == "linear" || family == "lin") && key == "alpha") {
        return InverseDemand::linear(value, market_cap);
    }
    if ((family == "exp" || family == "exponential") && key == "alpha") {
        return InverseDemand::exponential(value, market_cap);
    }
    if ((family == "hyp" || family == "hyperbolic") && (key == "eps" || key == "epsilon")) {
        return InverseDemand::hyperbolic(value, market_cap);
    }
    throw InvalidInput("unknown inverse demand spec '" + std::string(spec) + "'");
}

const ClauseCheck& Assumption1Report::clause(std::string_view name) const {
    for (const auto& c : clauses) {
        if (c.name == name) return c;
    }
    throw InvalidInput("no clause named '" + std::string(name) + "'");
}

namespace {

std::vector<double> sample_grid(double market_cap, std::size_t points) {
    points = std::max<std::size_t>(points, 2);
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = market_cap * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    grid.back() = market_cap;
    return grid;
}

void track(ClauseCheck& c, double margin, double location) {
    if (margin < c.worst_margin) {
        c.worst_margin = margin;
        c.worst_location = location;
    }
}

ClauseCheck fresh(std::string name) {
    ClauseCheck c;
    c.name = std::move(name);
    c.worst_margin = std::numeric_limits<double>::infinity();
    return c;
}

}  // namespace

Assumption1Report validate_assumption1(const InverseDemand& f, std::size_t grid_points) {
    const double M = f.market_cap();
    const auto grid = sample_grid(M, grid_points);

    auto at_zero = fresh("price_at_zero_is_one");
    auto decreasing = fresh("strictly_decreasing");
    auto positive = fresh("positive_at_market_cap");
    auto slope_up = fresh("slope_nondecreasing");
    auto revenue_up = fresh("revenue_increasing");
    auto concave = fresh("revenue_concave");

    track(at_zero, -std::abs(f.price(0.0) - 1.0), 0.0);
    track(positive, f.price(M), M);

    double prev_price = f.price(grid[0]);
    double prev_slope = f.slope(grid[0]);
    double prev_revenue = grid[0] * prev_price;
    track(concave, -(2.0 * prev_slope + grid[0] * f.curvature(grid[0])), grid[0]);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double s = grid[k];
        const double p = f.price(s);
        const double d = f.slope(s);
        const double revenue = s * p;
        track(decreasing, prev_price - p, grid[k - 1]);
        track(slope_up, d - prev_slope, grid[k - 1]);
        track(revenue_up, revenue - prev_revenue, grid[k - 1]);
        track(concave, -(2.0 * d + s * f.curvature(s)), s);
        prev_price = p;
        prev_slope = d;
        prev_revenue = revenue;
    }

    // Grid verdicts; the slope clause is non-strict and tolerates rounding.
    const double slope_tol = 1e-14 * std::max(1.0, std::abs(f.slope(0.0)));
    at_zero.pass = at_zero.worst_margin >= -1e-12;
    decreasing.pass = decreasing.worst_margin > 0.0;
    positive.pass = positive.worst_margin > 0.0;
    slope_up.pass = slope_up.worst_margin >= -slope_tol;
    revenue_up.pass = revenue_up.worst_margin > 0.0;
    concave.pass = concave.worst_margin > 0.0;

    const double x = f.parameter();
    switch (f.family()) {
        case InverseDemand::Family::Linear:
            at_zero.pass = decreasing.pass = slope_up.pass = concave.pass = true;
            positive.pass = x * M < 1.0;
            revenue_up.pass = 2.0 * x * M < 1.0;
            break;
        case InverseDemand::Family::Exponential:
            at_zero.pass = decreasing.pass = positive.pass = slope_up.pass = true;
            revenue_up.pass = x * M < 1.0;
            concave.pass = x * M < 2.0;
            break;
        case InverseDemand::Family::Hyperbolic:
            at_zero.pass = decreasing.pass = positive.pass = slope_up.pass = true;
            revenue_up.pass = concave.pass = true;
            break;
        case InverseDemand::Family::Custom:
            break;
    }

    Assumption1Report report;
    report.clauses = {at_zero, decreasing, positive, slope_up, revenue_up, concave};
    report.pass = std::all_of(report.clauses.begin(), report.clauses.end(),
                              [](const ClauseCheck& c) { return c.pass; });
    return report;
}

UniquenessReport validate_uniqueness(const InverseDemand& f, std::optional<double> nu,
                                     std::size_t grid_points) {
    const double M = f.market_cap();
    UniquenessReport report;

    double worst = std::numeric_limits<double>::infinity();
    for (double s : sample_grid(M, grid_points)) {
        const double margin = -(f.slope(s) + s * f.curvature(s));
        if (margin < worst) {
            worst = margin;
            report.worst_location = s;
        }
    }
    report.pointwise_pass = worst >= -1e-14 * std::max(1.0, std::abs(f.slope(0.0)));

    const double x = f.parameter();
    switch (f.family()) {
        case InverseDemand::Family::Linear: report.pointwise_pass = true; break;
        case InverseDemand::Family::Exponential: report.pointwise_pass = x * M <= 1.0; break;
        case InverseDemand::Family::Hyperbolic: report.pointwise_pass = x >= M; break;
        case InverseDemand::Family::Custom: break;
    }

    double bound = f.price(M);
    if (nu) bound = std::min(bound, *nu);
    report.margin = bound + M * f.slope(0.0);
    report.contraction_pass = report.margin > 0.0;
    report.pass = report.pointwise_pass && report.contraction_pass;
    return report;
}

}  // namespace firesale
