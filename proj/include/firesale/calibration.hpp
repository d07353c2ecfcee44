#pragma once

#include "firesale/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace firesale {

/// One bank's aggregate balance sheet.
struct BalanceSheetRow {
    std::string bank_id;
    double total_assets = 0.0;
    double capital = 0.0;
    double interbank_liabilities = 0.0;
    /// Tier 1 capital ratio, used as the liquid share of external assets.
    double tier1_ratio = 0.0;
};

struct BalanceSheets {
    Eigen::VectorXd liquid;
    Eigen::VectorXd illiquid;
    Eigen::VectorXd external;
    Eigen::VectorXd total_liabilities;
    Eigen::VectorXd interbank;
};

/// Splits external assets into liquid/illiquid by the tier 1 ratio and puts
/// every non-interbank, non-capital liability on the external creditor.
/// Interbank assets are taken equal to interbank liabilities.
BalanceSheets build_balance_sheets(const std::vector<BalanceSheetRow>& rows);

struct MatrixEstimate {
    /// n x n interbank block, zero diagonal.
    Eigen::MatrixXd liabilities;
    /// Relative rescaling applied to the in-totals to match the out-totals.
    double in_total_rescale = 1.0;
    std::size_t iterations = 0;
};

/// Interbank matrix from row (out) and column (in) totals: gravity fill with
/// a zero diagonal, then iterative proportional fitting to 1e-9 relative.
MatrixEstimate estimate_matrix(const Eigen::VectorXd& out_totals, Eigen::VectorXd in_totals,
                               std::size_t max_iter = 100000);

/// Full network from balance sheets. A supplied n x (n+1) matrix wins (an
/// all-zero external column is still filled from the balance sheets); a
/// supplied n x n matrix replaces only the interbank block; otherwise the
/// interbank block is estimated from the interbank totals.
FinancialNetwork build_network(const std::vector<BalanceSheetRow>& rows, const Eigen::VectorXd& rates,
                               const std::optional<Eigen::MatrixXd>& matrix = std::nullopt);

struct RejectedRow {
    std::size_t line = 0;
    std::string bank_id;
    std::string reason;
};

struct BalanceSheetFile {
    std::vector<BalanceSheetRow> rows;
    std::vector<RejectedRow> rejected;
};

/// Reads `bank_id,total_assets,capital,interbank_liabilities,tier1_ratio`.
/// Rows violating the balance-sheet invariants are rejected and reported;
/// a malformed header or unparsable number throws InvalidInput.
BalanceSheetFile read_balance_sheet_csv(std::istream& in);
BalanceSheetFile read_balance_sheet_csv_file(const std::string& path);

/// Reads `from,to,amount` with 1-based banks and to = 0 for the external
/// creditor. Duplicate pairs are summed. Returns n x (n+1).
Eigen::MatrixXd read_matrix_csv(std::istream& in, std::size_t n);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path, std::size_t n);

/// Writes the nonzero entries of an n x (n+1) liabilities matrix as `from,to,amount`.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& liabilities);

}  // namespace firesale
