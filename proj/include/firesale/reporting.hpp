#pragma once

#include "firesale/equilibrium_solver.hpp"
#include "firesale/fire_sale.hpp"
#include "firesale/inverse_demand.hpp"
#include "firesale/network.hpp"
#include "firesale/symmetric_oracle.hpp"

#include <json.hpp>

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace firesale {

enum class Regime { FireSale, Uncollateralized, Collateralized };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view text);

struct Metrics {
    double price = 1.0;
    /// sum_i s_i (1 - q): value lost on shares actually sold.
    double realized_loss = 0.0;
    /// sum_i a_i (1 - q): write-down of all holdings at the clearing price.
    double mtm_loss = 0.0;
    /// sum_i r_i l_i
    double interest_cost = 0.0;
    /// Banks paying less than they owe.
    std::size_t default_count = 0;
};

struct ScenarioInputs {
    FinancialNetwork network;
    InverseDemand demand;
    /// Haircut for the collateralized regime.
    double nu = 0.01;
};

struct ScenarioOutcome {
    Regime regime = Regime::FireSale;
    std::variant<EquilibriumResult, ClearingOutcome> result;
    Metrics metrics;
};

ScenarioOutcome run_scenario(const ScenarioInputs& inputs, Regime regime, const SolverConfig& config = {},
                             const ClearingConfig& clearing = {});

Metrics metrics_of(const EquilibriumResult& result, const FinancialNetwork& network);
Metrics metrics_of(const ClearingOutcome& outcome, const FinancialNetwork& network);

nlohmann::json to_json(const EquilibriumResult& result);
nlohmann::json to_json(const ClearingOutcome& outcome, const FinancialNetwork& network);
nlohmann::json to_json(const ScenarioOutcome& outcome, const FinancialNetwork& network);
nlohmann::json to_json(const Metrics& metrics);

enum class SweepParameter { Rate, Shortfall, Impact };
std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view text);

struct SweepSpec {
    SweepParameter varied = SweepParameter::Rate;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t steps = 2;
    std::vector<Regime> regimes{Regime::Uncollateralized, Regime::Collateralized};
    /// Symmetric scenarios can vary any parameter; networks vary r or alpha.
    std::variant<SymmetricScenario, ScenarioInputs> base;
    /// Permit alpha outside (0, 1/(2M)).
    bool allow_violations = false;
    /// 0 picks the hardware concurrency.
    unsigned threads = 0;

    void validate() const;
    std::vector<double> values() const;
};

struct SweepRow {
    double param = 0.0;
    Regime regime = Regime::FireSale;
    Metrics metrics;
    std::size_t outer_iters = 0;
    bool converged = false;
    /// Non-empty when the point failed; metrics are then meaningless.
    std::string error;
};

/// Evaluates every (value, regime) point, concurrently. Rows are ordered by
/// parameter then regime regardless of completion order. A failing point
/// becomes an error row and the sweep carries on.
std::vector<SweepRow> sweep(const SweepSpec& spec, const SolverConfig& config = {});

/// Columns: param,regime,price,realized_loss,mtm_loss,interest_cost,defaults,outer_iters,converged
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace firesale
