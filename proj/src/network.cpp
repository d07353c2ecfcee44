#include "firesale/network.hpp"

#include "firesale/errors.hpp"

#include <cmath>
#include <string>

namespace firesale {

namespace {

void require_nonnegative(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    if (!m.allFinite()) throw InvalidInput(std::string(what) + " has non-finite entries");
    if (m.size() > 0 && m.minCoeff() < 0.0) {
        throw InvalidInput(std::string(what) + " has negative entries");
    }
}

}  // namespace

FinancialNetwork::FinancialNetwork(Eigen::MatrixXd liabilities, Eigen::VectorXd liquid,
                                   Eigen::VectorXd illiquid, Eigen::VectorXd rates)
    : liabilities_(std::move(liabilities)),
      liquid_(std::move(liquid)),
      illiquid_(std::move(illiquid)),
      rates_(std::move(rates)) {
    const auto n = liquid_.size();
    if (liabilities_.rows() != n || liabilities_.cols() != n + 1) {
        throw InvalidInput("liabilities must be n x (n+1) for n = " + std::to_string(n));
    }
    if (illiquid_.size() != n || rates_.size() != n) {
        throw InvalidInput("liquid, illiquid and rate vectors must have the same length");
    }
    require_nonnegative(liabilities_, "liabilities");
    require_nonnegative(liquid_, "liquid endowment");
    require_nonnegative(illiquid_, "illiquid endowment");
    require_nonnegative(rates_, "interest rates");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (liabilities_(i, i + 1) != 0.0) {
            throw InvalidInput("bank " + std::to_string(i + 1) + " owes itself");
        }
    }
    total_liabilities_ = liabilities_.rowwise().sum();
}

Eigen::VectorXd FinancialNetwork::interbank_assets() const {
    return liabilities_.rightCols(liabilities_.cols() - 1).colwise().sum().transpose();
}

FinancialNetwork FinancialNetwork::with_rates(Eigen::VectorXd rates) const {
    return FinancialNetwork(liabilities_, liquid_, illiquid_, std::move(rates));
}

RelativeLiabilities relative_liabilities(const FinancialNetwork& network) {
    const auto& L = network.liabilities();
    const auto& pbar = network.total_liabilities();
    RelativeLiabilities rel{Eigen::MatrixXd::Zero(L.rows(), L.cols())};
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        if (pbar(i) > 0.0) rel.pi.row(i) = L.row(i) / pbar(i);
    }
    return rel;
}

std::string_view to_string(BankCase c) {
    switch (c) {
        case BankCase::CaseI: return "I";
        case BankCase::CaseII: return "II";
        case BankCase::CaseIII: return "III";
        case BankCase::CaseIV: return "IV";
    }
    return "?";
}

std::string_view to_string(BorrowingMode m) {
    return m == BorrowingMode::Uncollateralized ? "uncollateralized" : "collateralized";
}

bool ClassifiedSystem::participates(std::size_t i) const {
    return mode == BorrowingMode::Uncollateralized ? case_of[i] == BankCase::CaseIII
                                                   : case_of[i] == BankCase::CaseIV;
}

std::size_t ClassifiedSystem::participant_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < size(); ++i) count += participates(i) ? 1 : 0;
    return count;
}

ClassifiedSystem classify(const FinancialNetwork& network, BorrowingMode mode, std::optional<double> nu) {
    if (mode == BorrowingMode::Collateralized) {
        if (!nu || !(*nu > 0.0 && *nu < 1.0)) {
            throw InvalidInput("collateralized mode needs a stress-test haircut nu in (0, 1)");
        }
    } else {
        nu.reset();
    }

    const auto n = static_cast<Eigen::Index>(network.size());
    const auto& pbar = network.total_liabilities();
    const auto& c = network.liquid();
    const auto& a = network.illiquid();
    const Eigen::VectorXd nominal_in = network.interbank_assets();

    ClassifiedSystem sys;
    sys.mode = mode;
    sys.nu = nu;
    sys.case_of.assign(static_cast<std::size_t>(n), BankCase::CaseII);
    sys.holdings = a;
    sys.rates = network.rates();
    sys.total_liabilities = pbar;

    // Fundamental insolvency is judged once, on book values.
    sys.payments = pbar;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (pbar(i) > c(i) + a(i) + nominal_in(i)) {
            sys.case_of[static_cast<std::size_t>(i)] = BankCase::CaseI;
            sys.payments(i) = 0.0;
        }
    }

    const Eigen::MatrixXd pi_ib = relative_liabilities(network).interbank();
    sys.shortfalls = pbar - (c + pi_ib.transpose() * sys.payments);

    for (Eigen::Index i = 0; i < n; ++i) {
        auto& label = sys.case_of[static_cast<std::size_t>(i)];
        if (label == BankCase::CaseI) continue;
        const double h = sys.shortfalls(i);
        if (h <= 0.0) {
            label = BankCase::CaseII;
        } else if (mode == BorrowingMode::Uncollateralized) {
            label = BankCase::CaseIII;
        } else {
            label = a(i) * (1.0 - *nu) < h ? BankCase::CaseIII : BankCase::CaseIV;
        }
    }
    return sys;
}

}  // namespace firesale
