#include "firesale/reporting.hpp"

#include "firesale/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>

namespace firesale {

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::FireSale: return "fire_sale";
        case Regime::Uncollateralized: return "uncollateralized";
        case Regime::Collateralized: return "collateralized";
    }
    return "?";
}

Regime parse_regime(std::string_view text) {
    if (text == "fire_sale" || text == "firesale" || text == "fire-sale") return Regime::FireSale;
    if (text == "uncollateralized" || text == "uncoll") return Regime::Uncollateralized;
    if (text == "collateralized" || text == "coll") return Regime::Collateralized;
    throw InvalidInput("unknown regime '" + std::string(text) + "'");
}

std::string_view to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Rate: return "r";
        case SweepParameter::Shortfall: return "h";
        case SweepParameter::Impact: return "alpha";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
    if (text == "r" || text == "rate") return SweepParameter::Rate;
    if (text == "h" || text == "shortfall") return SweepParameter::Shortfall;
    if (text == "alpha" || text == "impact") return SweepParameter::Impact;
    throw InvalidInput("unknown sweep parameter '" + std::string(text) + "' (expected r, h or alpha)");
}

namespace {

// Borrowing regimes: a bank defaults exactly when it is fundamentally
// insolvent, since every other bank pays in full.
std::size_t count_short_payers(const Eigen::VectorXd& payments, const Eigen::VectorXd& owed) {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < payments.size(); ++i) {
        if (payments(i) < owed(i) - 1e-9 * std::max(1.0, owed(i))) ++count;
    }
    return count;
}

nlohmann::json vec(const Eigen::VectorXd& v) {
    return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

Metrics metrics_of(const EquilibriumResult& result, const FinancialNetwork& network) {
    const double loss = 1.0 - result.price;
    Metrics m;
    m.price = result.price;
    m.realized_loss = result.liquidations.sum() * loss;
    m.mtm_loss = network.illiquid().sum() * loss;
    m.interest_cost = network.rates().dot(result.borrowing);
    m.default_count = count_short_payers(result.payments, network.total_liabilities());
    return m;
}

Metrics metrics_of(const ClearingOutcome& outcome, const FinancialNetwork& network) {
    const double loss = 1.0 - outcome.price;
    Metrics m;
    m.price = outcome.price;
    m.realized_loss = outcome.liquidations.sum() * loss;
    m.mtm_loss = network.illiquid().sum() * loss;
    m.default_count = outcome.defaults.size();
    return m;
}

ScenarioOutcome run_scenario(const ScenarioInputs& inputs, Regime regime, const SolverConfig& config,
                             const ClearingConfig& clearing) {
    ScenarioOutcome out;
    out.regime = regime;
    if (regime == Regime::FireSale) {
        auto outcome = clear(inputs.network, inputs.demand, clearing);
        out.metrics = metrics_of(outcome, inputs.network);
        out.result = std::move(outcome);
        return out;
    }
    const auto mode = regime == Regime::Collateralized ? BorrowingMode::Collateralized
                                                       : BorrowingMode::Uncollateralized;
    std::optional<double> nu;
    if (mode == BorrowingMode::Collateralized) nu = inputs.nu;
    auto result = solve(inputs.network, inputs.demand, mode, nu, config);
    out.metrics = metrics_of(result, inputs.network);
    out.result = std::move(result);
    return out;
}

nlohmann::json to_json(const Metrics& m) {
    return {{"price", m.price},
            {"realized_loss", m.realized_loss},
            {"mtm_loss", m.mtm_loss},
            {"interest_cost", m.interest_cost},
            {"defaults", m.default_count}};
}

nlohmann::json to_json(const EquilibriumResult& r) {
    nlohmann::json cases = nlohmann::json::array();
    for (auto c : r.cases) cases.push_back(std::string(to_string(c)));
    nlohmann::json regimes = nlohmann::json::array();
    for (auto g : r.per_bank_regime) regimes.push_back(std::string(to_string(g)));
    return {{"mode", std::string(to_string(r.mode))},
            {"price", r.price},
            {"liquidations", vec(r.liquidations)},
            {"borrowing", vec(r.borrowing)},
            {"payments", vec(r.payments)},
            {"cases", cases},
            {"regimes", regimes},
            {"iters",
             {{"outer", r.outer_iters},
              {"inner_total", r.inner_iters_total},
              {"fallback_steps", r.fallback_steps},
              {"bracketed_steps", r.bracketed_steps}}},
            {"residuals", {{"kkt", r.kkt_residual}, {"price", r.price_residual}}},
            {"conditions_violated", r.conditions_violated},
            {"negative_equity", r.negative_equity}};
}

nlohmann::json to_json(const ClearingOutcome& o, const FinancialNetwork& network) {
    const auto n = static_cast<Eigen::Index>(network.size());
    nlohmann::json cases = nlohmann::json::array();
    nlohmann::json regimes = nlohmann::json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool defaulted = std::find(o.defaults.begin(), o.defaults.end(), static_cast<std::size_t>(i)) !=
                               o.defaults.end();
        regimes.push_back(defaulted ? "Default" : (o.liquidations(i) > 0.0 ? "LiquidateOnly" : "NoAction"));
    }
    return {{"mode", "fire_sale"},
            {"price", o.price},
            {"liquidations", vec(o.liquidations)},
            {"borrowing", vec(Eigen::VectorXd::Zero(n))},
            {"payments", vec(o.payments)},
            {"cases", cases},
            {"regimes", regimes},
            {"defaults", o.defaults},
            {"iters", {{"outer", o.iterations}}},
            {"residuals",
             {{"payment", o.payment_residual},
              {"liquidation", o.liquidation_residual},
              {"price", o.price_residual}}},
            {"monotone", o.monotone},
            {"conditions_violated", false}};
}

nlohmann::json to_json(const ScenarioOutcome& outcome, const FinancialNetwork& network) {
    nlohmann::json doc = std::visit(
        [&](const auto& r) -> nlohmann::json {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, EquilibriumResult>) {
                return to_json(r);
            } else {
                return to_json(r, network);
            }
        },
        outcome.result);
    doc["metrics"] = to_json(outcome.metrics);
    return doc;
}

namespace {

double market_cap_of(const SweepSpec& spec) {
    if (const auto* sc = std::get_if<SymmetricScenario>(&spec.base)) return sc->resolved_market_cap();
    return std::get<ScenarioInputs>(spec.base).demand.market_cap();
}

ScenarioInputs inputs_at(const SweepSpec& spec, double value) {
    if (const auto* base = std::get_if<SymmetricScenario>(&spec.base)) {
        SymmetricScenario sc = *base;
        switch (spec.varied) {
            case SweepParameter::Rate: sc.r = value; break;
            case SweepParameter::Shortfall: sc.h = value; break;
            case SweepParameter::Impact: sc.alpha = value; break;
        }
        // The collateralized haircut only matters in that regime; the
        // default rule depends on h, so it is re-derived at every point.
        SymmetricScenario coll = sc;
        coll.mode = BorrowingMode::Collateralized;
        const double nu = coll.resolved_nu().value_or(std::numeric_limits<double>::quiet_NaN());
        return ScenarioInputs{symmetric_network(sc), symmetric_demand(sc), nu};
    }
    ScenarioInputs in = std::get<ScenarioInputs>(spec.base);
    switch (spec.varied) {
        case SweepParameter::Rate:
            in.network = in.network.with_rates(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(in.network.size()), value));
            break;
        case SweepParameter::Impact: in.demand = in.demand.with_parameter(value); break;
        case SweepParameter::Shortfall: throw InvalidInput("h sweeps need a symmetric base scenario");
    }
    return in;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void SweepSpec::validate() const {
    if (!(lo < hi)) throw InvalidInput("sweep: need lo < hi");
    if (steps < 2) throw InvalidInput("sweep: need at least 2 steps");
    if (regimes.empty()) throw InvalidInput("sweep: no regimes selected");
    if (varied == SweepParameter::Shortfall && !std::holds_alternative<SymmetricScenario>(base)) {
        throw InvalidInput("sweep: h sweeps need a symmetric base scenario");
    }
    if (varied == SweepParameter::Impact) {
        if (const auto* in = std::get_if<ScenarioInputs>(&base); in && in->demand.family() != InverseDemand::Family::Linear) {
            throw InvalidInput("sweep: alpha sweeps need a linear inverse demand");
        }
        const double cap = 1.0 / (2.0 * market_cap_of(*this));
        if (!allow_violations && !(lo > 0.0 && hi < cap)) {
            throw InvalidInput("sweep: alpha range must lie in (0, 1/(2M)) = (0, " + fmt(cap) +
                               "); pass allow_violations to override");
        }
    }
    if (varied == SweepParameter::Rate && lo < 0.0) throw InvalidInput("sweep: negative rates");
}

std::vector<double> SweepSpec::values() const {
    std::vector<double> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        out[k] = k + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
    return out;
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const SolverConfig& config) {
    spec.validate();
    config.validate();
    const auto values = spec.values();
    std::vector<Regime> regimes = spec.regimes;
    std::sort(regimes.begin(), regimes.end());
    regimes.erase(std::unique(regimes.begin(), regimes.end()), regimes.end());
    const std::size_t per_value = regimes.size();
    std::vector<SweepRow> rows(values.size() * per_value);

    auto evaluate = [&](std::size_t k) {
        SweepRow& row = rows[k];
        row.param = values[k / per_value];
        row.regime = regimes[k % per_value];
        try {
            const auto inputs = inputs_at(spec, row.param);
            const auto outcome = run_scenario(inputs, row.regime, config);
            row.metrics = outcome.metrics;
            if (const auto* eq = std::get_if<EquilibriumResult>(&outcome.result)) {
                row.outer_iters = eq->outer_iters;
            } else {
                row.outer_iters = std::get<ClearingOutcome>(outcome.result).iterations;
            }
            row.converged = true;
        } catch (const NonConvergence& e) {
            row.error = std::string("nonconvergence: ") + e.what();
            row.outer_iters = e.iterations();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) evaluate(k);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "param,regime,price,realized_loss,mtm_loss,interest_cost,defaults,outer_iters,converged\n";
    for (const auto& r : rows) {
        out << fmt(r.param) << ',' << to_string(r.regime) << ',';
        if (!r.error.empty()) {
            out << "nan,nan,nan,nan,," << r.outer_iters << ",error\n";
            continue;
        }
        out << fmt(r.metrics.price) << ',' << fmt(r.metrics.realized_loss) << ',' << fmt(r.metrics.mtm_loss) << ','
            << fmt(r.metrics.interest_cost) << ',' << r.metrics.default_count << ',' << r.outer_iters << ','
            << (r.converged ? "true" : "false") << '\n';
    }
}

}  // namespace firesale
