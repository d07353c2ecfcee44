#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace firesale {

/// Interbank network with one external creditor (column 0 of the liabilities).
///
/// liabilities is n x (n+1): entry (i, 0) is bank i's external obligation and
/// entry (i, j) for j >= 1 is what bank i owes bank j. Banks are numbered
/// 1..n in the column index and 0..n-1 in every per-bank vector.
class FinancialNetwork {
public:
    FinancialNetwork(Eigen::MatrixXd liabilities, Eigen::VectorXd liquid, Eigen::VectorXd illiquid,
                     Eigen::VectorXd rates);

    std::size_t size() const noexcept { return static_cast<std::size_t>(liquid_.size()); }
    const Eigen::MatrixXd& liabilities() const noexcept { return liabilities_; }
    const Eigen::VectorXd& liquid() const noexcept { return liquid_; }
    const Eigen::VectorXd& illiquid() const noexcept { return illiquid_; }
    const Eigen::VectorXd& rates() const noexcept { return rates_; }
    /// Row sums of liabilities.
    const Eigen::VectorXd& total_liabilities() const noexcept { return total_liabilities_; }
    /// sum_j L_ji over interbank creditors j, i.e. nominal interbank assets.
    Eigen::VectorXd interbank_assets() const;

    FinancialNetwork with_rates(Eigen::VectorXd rates) const;

private:
    Eigen::MatrixXd liabilities_;
    Eigen::VectorXd liquid_;
    Eigen::VectorXd illiquid_;
    Eigen::VectorXd rates_;
    Eigen::VectorXd total_liabilities_;
};

/// Pro-rata shares pi_ij = L_ij / pbar_i (zero rows when pbar_i = 0).
struct RelativeLiabilities {
    Eigen::MatrixXd pi;

    /// Interbank block (columns 1..n).
    Eigen::MatrixXd interbank() const { return pi.rightCols(pi.cols() - 1); }
};

RelativeLiabilities relative_liabilities(const FinancialNetwork& network);

enum class BankCase { CaseI, CaseII, CaseIII, CaseIV };
enum class BorrowingMode { Uncollateralized, Collateralized };

std::string_view to_string(BankCase c);
std::string_view to_string(BorrowingMode m);

/// Case partition and the (fixed) payments and shortfalls that go with it.
///
/// Everything the equilibrium solver needs is copied in, so a ClassifiedSystem
/// stands on its own once built.
struct ClassifiedSystem {
    BorrowingMode mode = BorrowingMode::Uncollateralized;
    std::optional<double> nu;
    std::vector<BankCase> case_of;
    Eigen::VectorXd payments;
    Eigen::VectorXd shortfalls;
    Eigen::VectorXd holdings;
    Eigen::VectorXd rates;
    Eigen::VectorXd total_liabilities;

    std::size_t size() const noexcept { return case_of.size(); }
    /// Case III when uncollateralized, Case IV when collateralized.
    bool participates(std::size_t i) const;
    std::size_t participant_count() const;
};

/// Classifies every bank. In collateralized mode nu must lie in (0, 1).
ClassifiedSystem classify(const FinancialNetwork& network, BorrowingMode mode,
                          std::optional<double> nu = std::nullopt);

}  // namespace firesale
