#include "firesale/calibration.hpp"

#include "firesale/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace firesale {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double to_double(std::string_view text, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw InvalidInput("line " + std::to_string(line) + ": cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

long to_index(std::string_view text, std::size_t line) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidInput("line " + std::to_string(line) + ": cannot parse index '" + std::string(text) + "'");
    }
    return v;
}

bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

// Empty string when the row is acceptable.
std::string row_problem(const BalanceSheetRow& r) {
    if (r.total_assets < 0.0 || r.capital < 0.0 || r.interbank_liabilities < 0.0) {
        return "negative balance-sheet entry";
    }
    if (!(r.tier1_ratio >= 0.0 && r.tier1_ratio <= 1.0)) return "tier1_ratio outside [0, 1]";
    if (r.total_assets < r.interbank_liabilities + r.capital) {
        return "total assets below interbank liabilities plus capital (negative external liability)";
    }
    return {};
}

bool marginals_match(const Eigen::VectorXd& actual, const Eigen::VectorXd& target, double rel) {
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        if (std::abs(actual(i) - target(i)) > rel * target(i)) return false;
    }
    return true;
}

}  // namespace

BalanceSheets build_balance_sheets(const std::vector<BalanceSheetRow>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    BalanceSheets out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n),
                      Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (auto why = row_problem(r); !why.empty()) {
            throw InvalidInput("bank '" + r.bank_id + "': " + why);
        }
        const double external_assets = r.total_assets - r.interbank_liabilities;
        out.liquid(i) = r.tier1_ratio * external_assets;
        out.illiquid(i) = (1.0 - r.tier1_ratio) * external_assets;
        out.external(i) = external_assets - r.capital;
        out.interbank(i) = r.interbank_liabilities;
        out.total_liabilities(i) = out.external(i) + r.interbank_liabilities;

        const double net_worth = r.total_assets - out.total_liabilities(i);
        if (std::abs(net_worth - r.capital) > 1e-9 * std::max(1.0, r.total_assets)) {
            throw InvalidInput("bank '" + r.bank_id + "': net worth does not equal capital");
        }
    }
    return out;
}

MatrixEstimate estimate_matrix(const Eigen::VectorXd& out_totals, Eigen::VectorXd in_totals,
                               std::size_t max_iter) {
    const auto n = out_totals.size();
    if (in_totals.size() != n) throw InvalidInput("estimate_matrix: marginal lengths differ");
    if ((n > 0) && (out_totals.minCoeff() < 0.0 || in_totals.minCoeff() < 0.0)) {
        throw InvalidInput("estimate_matrix: negative marginal");
    }

    MatrixEstimate est{Eigen::MatrixXd::Zero(n, n), 1.0, 0};
    // A lone bank has nobody to owe.
    if (n < 2) return est;
    const double sum_out = out_totals.sum();
    const double sum_in = in_totals.sum();
    if (sum_out == 0.0 && sum_in == 0.0) return est;
    if (sum_out == 0.0 || sum_in == 0.0) {
        throw InvalidInput("estimate_matrix: one side of the marginals is all zero");
    }
    if (std::abs(sum_out - sum_in) > 1e-6 * std::max(sum_out, sum_in)) {
        est.in_total_rescale = sum_out / sum_in;
        in_totals *= est.in_total_rescale;
    }

    auto& L = est.liabilities;
    L = out_totals * in_totals.transpose() / in_totals.sum();
    L.diagonal().setZero();

    constexpr double kRel = 1e-11;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double row = L.row(i).sum();
            if (row > 0.0) L.row(i) *= out_totals(i) / row;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double col = L.col(j).sum();
            if (col > 0.0) L.col(j) *= in_totals(j) / col;
        }
        est.iterations = it;
        if (marginals_match(L.rowwise().sum(), out_totals, kRel) &&
            marginals_match(L.colwise().sum().transpose(), in_totals, kRel)) {
            return est;
        }
    }
    throw InvalidInput("estimate_matrix: marginals cannot be matched with a zero diagonal");
}

FinancialNetwork build_network(const std::vector<BalanceSheetRow>& rows, const Eigen::VectorXd& rates,
                               const std::optional<Eigen::MatrixXd>& matrix) {
    const auto sheets = build_balance_sheets(rows);
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (rates.size() != n) throw InvalidInput("one rate per bank is required");

    Eigen::MatrixXd L(n, n + 1);
    L.col(0) = sheets.external;
    if (matrix && matrix->rows() == n && matrix->cols() == n + 1) {
        L = *matrix;
        if (L.col(0).isZero(0.0)) L.col(0) = sheets.external;
    } else if (matrix && matrix->rows() == n && matrix->cols() == n) {
        L.rightCols(n) = *matrix;
    } else if (matrix) {
        throw InvalidInput("liabilities matrix has the wrong shape");
    } else {
        L.rightCols(n) = estimate_matrix(sheets.interbank, sheets.interbank).liabilities;
    }
    return FinancialNetwork(std::move(L), sheets.liquid, sheets.illiquid, rates);
}

BalanceSheetFile read_balance_sheet_csv(std::istream& in) {
    static constexpr std::string_view kHeader[] = {"bank_id", "total_assets", "capital", "interbank_liabilities",
                                                   "tier1_ratio"};
    BalanceSheetFile file;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        const auto fields = split(line);
        if (!have_header) {
            if (fields.size() != 5 || !std::equal(fields.begin(), fields.end(), std::begin(kHeader))) {
                throw InvalidInput("balance-sheet CSV header must be "
                                   "bank_id,total_assets,capital,interbank_liabilities,tier1_ratio");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 5) {
            throw InvalidInput("line " + std::to_string(lineno) + ": expected 5 fields");
        }
        BalanceSheetRow row{std::string(fields[0]), to_double(fields[1], lineno), to_double(fields[2], lineno),
                            to_double(fields[3], lineno), to_double(fields[4], lineno)};
        if (auto why = row_problem(row); !why.empty()) {
            file.rejected.push_back({lineno, row.bank_id, why});
        } else {
            file.rows.push_back(std::move(row));
        }
    }
    if (!have_header) throw InvalidInput("balance-sheet CSV is empty");
    return file;
}

BalanceSheetFile read_balance_sheet_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return read_balance_sheet_csv(in);
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, std::size_t n) {
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(size, size + 1);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        const auto fields = split(line);
        if (!have_header) {
            if (fields.size() != 3 || fields[0] != "from" || fields[1] != "to" || fields[2] != "amount") {
                throw InvalidInput("matrix CSV header must be from,to,amount");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 3) throw InvalidInput("line " + std::to_string(lineno) + ": expected 3 fields");
        const long from = to_index(fields[0], lineno);
        const long to = to_index(fields[1], lineno);
        const double amount = to_double(fields[2], lineno);
        if (from < 1 || from > size || to < 0 || to > size) {
            throw InvalidInput("line " + std::to_string(lineno) + ": bank index out of range");
        }
        if (from == to) throw InvalidInput("line " + std::to_string(lineno) + ": self-obligation");
        if (amount < 0.0) throw InvalidInput("line " + std::to_string(lineno) + ": negative amount");
        L(from - 1, to) += amount;
    }
    if (!have_header) throw InvalidInput("matrix CSV is empty");
    return L;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return read_matrix_csv(in, n);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& liabilities) {
    out << "from,to,amount\n";
    char buf[64];
    for (Eigen::Index i = 0; i < liabilities.rows(); ++i) {
        for (Eigen::Index j = 0; j < liabilities.cols(); ++j) {
            if (liabilities(i, j) == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", liabilities(i, j));
            out << (i + 1) << ',' << j << ',' << buf << '\n';
        }
    }
}

}  // namespace firesale
