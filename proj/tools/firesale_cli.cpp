// Command-line front end: solve, sweep, symmetric, calibrate, validate-idf.
#include "firesale/calibration.hpp"
#include "firesale/equilibrium_solver.hpp"
#include "firesale/errors.hpp"
#include "firesale/fire_sale.hpp"
#include "firesale/inverse_demand.hpp"
#include "firesale/reporting.hpp"
#include "firesale/symmetric_oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace firesale;
using nlohmann::json;

namespace {

constexpr int kExitNonConvergence = 2;
constexpr int kExitInvalidInput = 3;

struct Common {
    std::string network;
    std::string matrix;
    std::string idf = "linear:alpha=0";
    double nu = 0.01;
    double rate = 0.05;
    std::optional<double> market_cap;
    std::string out;
    std::string format = "json";
    bool allow_violations = false;
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InvalidInput("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void report_rejected(const BalanceSheetFile& file) {
    for (const auto& r : file.rejected) {
        std::cerr << "warning: rejected line " << r.line << " (" << r.bank_id << "): " << r.reason << '\n';
    }
}

ScenarioInputs load_inputs(const Common& c) {
    if (c.network.empty()) throw InvalidInput("--network is required");
    const auto file = read_balance_sheet_csv_file(c.network);
    report_rejected(file);
    if (file.rows.empty()) throw InvalidInput("no usable balance-sheet rows in " + c.network);
    const auto n = static_cast<Eigen::Index>(file.rows.size());
    std::optional<Eigen::MatrixXd> matrix;
    if (!c.matrix.empty()) matrix = read_matrix_csv_file(c.matrix, file.rows.size());
    auto network = build_network(file.rows, Eigen::VectorXd::Constant(n, c.rate), matrix);
    const double M = c.market_cap.value_or(network.illiquid().sum());
    auto demand = parse_inverse_demand(c.idf, M);
    return ScenarioInputs{std::move(network), std::move(demand), c.nu};
}

std::vector<Regime> regimes_from(const std::string& mode) {
    if (mode == "all") return {Regime::FireSale, Regime::Uncollateralized, Regime::Collateralized};
    if (mode == "borrowing") return {Regime::Uncollateralized, Regime::Collateralized};
    return {parse_regime(mode)};
}

void check_format(const std::string& format) {
    if (format != "json" && format != "csv") throw InvalidInput("--format must be json or csv");
}

void warn_conditions(const ScenarioInputs& in, bool allow_violations) {
    const auto a1 = validate_assumption1(in.demand);
    if (!a1.pass) {
        std::string failed;
        for (const auto& c : a1.clauses) {
            if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
        }
        if (!allow_violations) {
            throw InvalidInput("inverse demand violates the standing assumption (" + failed +
                               "); pass --allow-violations to run anyway");
        }
        std::cerr << "warning: inverse demand violates " << failed << '\n';
    }
}

int run_solve(const Common& c, const std::string& mode) {
    check_format(c.format);
    const auto inputs = load_inputs(c);
    warn_conditions(inputs, c.allow_violations);
    Output out(c.out);
    json docs = json::array();
    std::ostringstream csv;
    csv << "regime,bank,liquidation,borrowing,payment,case,state\n";
    for (auto regime : regimes_from(mode)) {
        const auto outcome = run_scenario(inputs, regime);
        docs.push_back(to_json(outcome, inputs.network));
        auto name = std::string(to_string(regime));
        if (const auto* eq = std::get_if<EquilibriumResult>(&outcome.result)) {
            for (Eigen::Index i = 0; i < eq->liquidations.size(); ++i) {
                const auto k = static_cast<std::size_t>(i);
                csv << name << ',' << i + 1 << ',' << num(eq->liquidations(i)) << ',' << num(eq->borrowing(i)) << ','
                    << num(eq->payments(i)) << ',' << to_string(eq->cases[k]) << ','
                    << to_string(eq->per_bank_regime[k]) << '\n';
            }
        } else {
            const auto& fs = std::get<ClearingOutcome>(outcome.result);
            for (Eigen::Index i = 0; i < fs.liquidations.size(); ++i) {
                const bool def = fs.payments(i) < inputs.network.total_liabilities()(i) -
                                                      1e-9 * std::max(1.0, inputs.network.total_liabilities()(i));
                csv << name << ',' << i + 1 << ',' << num(fs.liquidations(i)) << ",0," << num(fs.payments(i))
                    << ",," << (def ? "Default" : "Solvent") << '\n';
            }
        }
    }
    if (c.format == "csv") {
        out.stream() << csv.str();
    } else {
        out.stream() << (docs.size() == 1 ? docs[0] : docs).dump(2) << '\n';
    }
    return 0;
}

struct SymmetricArgs {
    int n = 2;
    double h = 0.0;
    double a = 0.0;
    double r = 0.05;
    double alpha = 0.0;
    std::optional<double> nu;
    std::optional<double> market_cap;
    std::string mode = "uncollateralized";
};

SymmetricScenario scenario_from(const SymmetricArgs& s) {
    SymmetricScenario sc;
    sc.n = s.n;
    sc.h = s.h;
    sc.a = s.a;
    sc.r = s.r;
    sc.alpha = s.alpha;
    sc.nu = s.nu;
    sc.market_cap = s.market_cap;
    const auto regime = parse_regime(s.mode);
    if (regime == Regime::FireSale) throw InvalidInput("symmetric --mode must be a borrowing regime");
    sc.mode = regime == Regime::Collateralized ? BorrowingMode::Collateralized : BorrowingMode::Uncollateralized;
    return sc;
}

int run_symmetric(const SymmetricArgs& args, const Common& c) {
    const auto sc = scenario_from(args);
    const auto eq = closed_form(sc);
    const auto th = thresholds(sc);
    const auto solved = solve(symmetric_network(sc), symmetric_demand(sc), sc.mode, sc.resolved_nu());
    auto ext = [](ExtendedShares x) -> json { return x.is_infinite() ? json("inf") : json(x.value()); };
    json doc = {{"closed_form",
                 {{"s_per_bank", eq.s_per_bank},
                  {"price", eq.price},
                  {"regime", std::string(to_string(eq.regime))},
                  {"liquidation_root", ext(eq.liquidation_root)},
                  {"stationary", ext(eq.stationary)},
                  {"collateral_cap", ext(eq.collateral_cap)}}},
                {"thresholds",
                 {{"h_liquidate_mixed", th.h_liquidate_mixed},
                  {"h_mixed_cap", th.h_mixed_cap},
                  {"h_liquidate_cap", th.liquidate_cap_valid ? json(th.h_liquidate_cap) : json(nullptr)}}},
                {"solver", to_json(solved)}};
    if (const auto nu = sc.resolved_nu()) doc["nu"] = *nu;
    Output out(c.out);
    out.stream() << doc.dump(2) << '\n';
    return 0;
}

int run_sweep(const Common& c, const SymmetricArgs& sym, bool symmetric_base, const std::string& param, double lo,
              double hi, std::size_t steps, const std::string& mode, unsigned threads) {
    check_format(c.format);
    SweepSpec spec;
    spec.varied = parse_sweep_parameter(param);
    spec.lo = lo;
    spec.hi = hi;
    spec.steps = steps;
    spec.regimes = regimes_from(mode);
    spec.allow_violations = c.allow_violations;
    spec.threads = threads;
    if (symmetric_base) {
        auto sc = scenario_from(sym);
        // Regimes are chosen per row; the base mode only feeds the nu default.
        sc.mode = BorrowingMode::Uncollateralized;
        sc.nu = sym.nu;
        spec.base = sc;
    } else {
        spec.base = load_inputs(c);
    }
    const auto rows = sweep(spec);
    Output out(c.out);
    if (c.format == "csv") {
        write_sweep_csv(out.stream(), rows);
    } else {
        json doc = json::array();
        for (const auto& r : rows) {
            json row = {{"param", r.param},
                        {"regime", std::string(to_string(r.regime))},
                        {"outer_iters", r.outer_iters},
                        {"converged", r.converged}};
            if (r.error.empty()) {
                row["metrics"] = to_json(r.metrics);
            } else {
                row["error"] = r.error;
            }
            doc.push_back(row);
        }
        out.stream() << doc.dump(2) << '\n';
    }
    for (const auto& r : rows) {
        if (!r.error.empty()) std::cerr << "warning: " << to_string(spec.varied) << '=' << num(r.param) << ' '
                                        << to_string(r.regime) << ": " << r.error << '\n';
    }
    return 0;
}

int run_calibrate(const Common& c) {
    check_format(c.format);
    if (c.network.empty()) throw InvalidInput("--network is required");
    const auto file = read_balance_sheet_csv_file(c.network);
    report_rejected(file);
    if (file.rows.empty()) throw InvalidInput("no usable balance-sheet rows in " + c.network);
    const auto n = static_cast<Eigen::Index>(file.rows.size());
    std::optional<Eigen::MatrixXd> matrix;
    if (!c.matrix.empty()) matrix = read_matrix_csv_file(c.matrix, file.rows.size());
    const auto network = build_network(file.rows, Eigen::VectorXd::Constant(n, c.rate), matrix);
    Output out(c.out);
    if (c.format == "csv") {
        write_matrix_csv(out.stream(), network.liabilities());
        return 0;
    }
    json banks = json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        banks.push_back({{"bank_id", file.rows[static_cast<std::size_t>(i)].bank_id},
                         {"liquid", network.liquid()(i)},
                         {"illiquid", network.illiquid()(i)},
                         {"external_liabilities", network.liabilities()(i, 0)},
                         {"total_liabilities", network.total_liabilities()(i)}});
    }
    json rejected = json::array();
    for (const auto& r : file.rejected) {
        rejected.push_back({{"line", r.line}, {"bank_id", r.bank_id}, {"reason", r.reason}});
    }
    out.stream() << json{{"banks", banks},
                         {"market_cap", network.illiquid().sum()},
                         {"alpha_bound", 1.0 / (2.0 * network.illiquid().sum())},
                         {"rejected", rejected}}
                        .dump(2)
                 << '\n';
    return 0;
}

int run_validate_idf(const Common& c, std::optional<double> nu) {
    if (!c.market_cap) throw InvalidInput("--market-cap is required");
    const auto f = parse_inverse_demand(c.idf, *c.market_cap);
    const auto a1 = validate_assumption1(f);
    const auto u = validate_uniqueness(f, nu);
    json clauses = json::array();
    for (const auto& cl : a1.clauses) {
        clauses.push_back({{"name", cl.name},
                           {"pass", cl.pass},
                           {"worst_margin", cl.worst_margin},
                           {"worst_location", cl.worst_location}});
    }
    json doc = {{"idf", f.describe()},
                {"market_cap", f.market_cap()},
                {"assumption1", {{"pass", a1.pass}, {"clauses", clauses}}},
                {"uniqueness",
                 {{"pass", u.pass},
                  {"pointwise_pass", u.pointwise_pass},
                  {"contraction_pass", u.contraction_pass},
                  {"margin", u.margin},
                  {"worst_location", u.worst_location}}}};
    Output out(c.out);
    out.stream() << doc.dump(2) << '\n';
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool network_flags = true) {
    if (network_flags) {
        sub->add_option("--network", c.network, "Balance-sheet CSV");
        sub->add_option("--matrix", c.matrix, "Liabilities CSV (from,to,amount; to=0 is external)");
        sub->add_option("--rate", c.rate, "Borrowing rate applied to every bank")->capture_default_str();
    }
    sub->add_option("--idf", c.idf, "Inverse demand: linear:alpha=, exp:alpha=, hyp:eps=")->capture_default_str();
    sub->add_option("--market-cap", c.market_cap, "Market capitalization M (default: total holdings)");
    sub->add_option("--out", c.out, "Output path (default: stdout)");
    sub->add_option("--format", c.format, "json or csv")->capture_default_str();
    sub->add_flag("--allow-violations", c.allow_violations, "Run even when the inverse demand fails its checks");
}

void add_symmetric(CLI::App* sub, SymmetricArgs& s, bool required) {
    auto* n = sub->add_option("--n", s.n, "Number of banks");
    auto* h = sub->add_option("--h", s.h, "Liquid shortfall per bank");
    auto* a = sub->add_option("--a", s.a, "Illiquid holdings per bank");
    sub->add_option("--r", s.r, "Borrowing rate")->capture_default_str();
    auto* alpha = sub->add_option("--alpha", s.alpha, "Linear price impact");
    if (required) {
        n->required();
        h->required();
        a->required();
        alpha->required();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clearing equilibria with fire sales and borrowing"};
    app.require_subcommand(1);
    // -h would clash with the shortfall option --h.
    app.set_help_flag("--help", "Print this help message and exit");

    Common common;
    SymmetricArgs sym;
    std::string mode = "all";

    auto* solve_cmd = app.add_subcommand("solve", "Solve one network in one or more regimes");
    add_common(solve_cmd, common);
    solve_cmd->add_option("--mode", mode, "fire_sale, uncollateralized, collateralized, borrowing or all")
        ->capture_default_str();
    solve_cmd->add_option("--nu", common.nu, "Stress-test haircut")->capture_default_str();

    std::string param = "alpha";
    double lo = 0.0;
    double hi = 0.0;
    std::size_t steps = 11;
    unsigned threads = 0;
    bool symmetric_base = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep r, h or alpha and tabulate metrics per regime");
    add_common(sweep_cmd, common);
    add_symmetric(sweep_cmd, sym, false);
    sweep_cmd->add_flag("--symmetric", symmetric_base, "Use the symmetric system given by --n --h --a --r --alpha");
    sweep_cmd->add_option("--param", param, "r, h or alpha")->capture_default_str();
    sweep_cmd->add_option("--lo", lo, "Lower end")->required();
    sweep_cmd->add_option("--hi", hi, "Upper end")->required();
    sweep_cmd->add_option("--steps", steps, "Number of points")->capture_default_str();
    sweep_cmd->add_option("--mode", mode, "fire_sale, uncollateralized, collateralized, borrowing or all")
        ->capture_default_str();
    sweep_cmd->add_option("--nu", common.nu, "Stress-test haircut (network base)")->capture_default_str();
    sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* sym_cmd = app.add_subcommand("symmetric", "Closed-form symmetric equilibrium next to the solver");
    add_symmetric(sym_cmd, sym, true);
    sym_cmd->add_option("--nu", sym.nu, "Stress-test haircut (default: half the passing maximum)");
    sym_cmd->add_option("--mode", sym.mode, "uncollateralized or collateralized")->capture_default_str();
    sym_cmd->add_option("--market-cap", sym.market_cap, "Market capitalization (default n a)");
    sym_cmd->add_option("--out", common.out, "Output path (default: stdout)");

    auto* cal_cmd = app.add_subcommand("calibrate", "Build the network from balance sheets");
    add_common(cal_cmd, common);

    std::optional<double> idf_nu;
    auto* idf_cmd = app.add_subcommand("validate-idf", "Check an inverse demand function");
    add_common(idf_cmd, common, false);
    idf_cmd->add_option("--nu", idf_nu, "Stress-test haircut for the collateralized uniqueness bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalidInput;
    }

    try {
        if (*solve_cmd) return run_solve(common, mode);
        if (*sweep_cmd) {
            if (symmetric_base && param != "h" && sym.h <= 0.0) throw InvalidInput("--h is required with --symmetric");
            if (symmetric_base) sym.market_cap = common.market_cap;
            return run_sweep(common, sym, symmetric_base, param, lo, hi, steps, mode, threads);
        }
        if (*sym_cmd) return run_symmetric(sym, common);
        if (*cal_cmd) return run_calibrate(common);
        if (*idf_cmd) return run_validate_idf(common, idf_nu);
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
