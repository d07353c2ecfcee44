#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "firesale/calibration.hpp"
#include "firesale/errors.hpp"
#include "firesale/network.hpp"
#include "support.hpp"

#include <cmath>
#include <sstream>

using namespace firesale;

TEST_CASE("balance sheet from aggregates") {
    const auto bs = build_balance_sheets({{"A", 100.0, 5.0, 20.0, 0.04}});
    CHECK(bs.liquid(0) == doctest::Approx(3.2));
    CHECK(bs.illiquid(0) == doctest::Approx(76.8));
    CHECK(bs.external(0) == doctest::Approx(75.0));
    CHECK(bs.total_liabilities(0) == doctest::Approx(95.0));
    CHECK(bs.interbank(0) == 20.0);

    CHECK(build_balance_sheets({{"liquid", 50.0, 2.0, 10.0, 1.0}}).illiquid(0) == 0.0);
    CHECK(build_balance_sheets({{"illiquid", 50.0, 2.0, 10.0, 0.0}}).liquid(0) == 0.0);

    CHECK_THROWS_AS(build_balance_sheets({{"bad", 10.0, 5.0, 8.0, 0.1}}), InvalidInput);
    CHECK_THROWS_AS(build_balance_sheets({{"bad", 10.0, 1.0, 1.0, 1.5}}), InvalidInput);
}

TEST_CASE("matrix estimation examples") {
    Eigen::VectorXd one(2);
    one << 1.0, 1.0;
    const auto two = estimate_matrix(one, one);
    CHECK(two.liabilities(0, 0) == 0.0);
    CHECK(two.liabilities(1, 1) == 0.0);
    CHECK(two.liabilities(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two.liabilities(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto single = estimate_matrix(Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 3.0));
    CHECK(single.liabilities.isZero(0.0));

    Eigen::VectorXd out(2), in(2);
    out << 2.0, 0.0;
    in << 0.0, 2.0;
    const auto forced = estimate_matrix(out, in);
    CHECK(forced.liabilities(0, 1) == doctest::Approx(2.0));
    CHECK(forced.liabilities(0, 0) == 0.0);
    CHECK(forced.liabilities(1, 0) == 0.0);
    CHECK(forced.liabilities(1, 1) == 0.0);

    CHECK(estimate_matrix(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)).liabilities.isZero(0.0));
    CHECK_THROWS_AS(estimate_matrix(one, Eigen::VectorXd::Zero(2)), InvalidInput);
    CHECK_THROWS_AS(estimate_matrix(one, Eigen::VectorXd::Ones(3)), InvalidInput);
}

TEST_CASE("mismatched totals are rescaled and the factor recorded") {
    Eigen::VectorXd out(3), in(3);
    out << 1.0, 2.0, 3.0;
    in << 2.0, 3.0, 3.0;
    const auto est = estimate_matrix(out, in);
    CHECK(est.in_total_rescale == doctest::Approx(6.0 / 8.0));
    const Eigen::VectorXd cols = est.liabilities.colwise().sum().transpose();
    for (int j = 0; j < 3; ++j) CHECK(cols(j) == doctest::Approx(in(j) * 0.75).epsilon(1e-9));
}

TEST_CASE("property: estimated marginals match with a zero diagonal") {
    testing_support::Rng rng(77);
    for (int t = 0; t < 100; ++t) {
        const int n = rng.integer(3, 40);
        Eigen::VectorXd out(n), in(n);
        for (int i = 0; i < n; ++i) {
            out(i) = rng.uniform(0.1, 10.0);
            in(i) = rng.uniform(0.1, 10.0);
        }
        // Keep every in-total below half the total so a zero diagonal is feasible.
        in *= out.sum() / in.sum();
        if (in.maxCoeff() > 0.45 * in.sum() || out.maxCoeff() > 0.45 * out.sum()) continue;
        const auto est = estimate_matrix(out, in);
        CAPTURE(t);
        REQUIRE(est.liabilities.diagonal().isZero(0.0));
        REQUIRE(est.liabilities.minCoeff() >= 0.0);
        const Eigen::VectorXd rows = est.liabilities.rowwise().sum();
        const Eigen::VectorXd cols = est.liabilities.colwise().sum().transpose();
        for (int i = 0; i < n; ++i) {
            REQUIRE(std::abs(rows(i) - out(i)) <= 1e-9 * out(i));
            REQUIRE(std::abs(cols(i) - in(i)) <= 1e-9 * in(i));
        }
    }
}

TEST_CASE("balance-sheet CSV") {
    std::istringstream in(
        "bank_id,total_assets,capital,interbank_liabilities,tier1_ratio\n"
        "# comment\n"
        "A,100,5,20,0.04\n"
        "\n"
        "B, 50 , 2, 10, 0.1\n"
        "C,10,5,8,0.1\n"
        "D,10,1,1,1.2\n");
    const auto file = read_balance_sheet_csv(in);
    REQUIRE(file.rows.size() == 2);
    CHECK(file.rows[0].bank_id == "A");
    CHECK(file.rows[1].total_assets == 50.0);
    REQUIRE(file.rejected.size() == 2);
    CHECK(file.rejected[0].bank_id == "C");
    CHECK(file.rejected[0].line == 6);
    CHECK(file.rejected[1].reason.find("tier1") != std::string::npos);

    std::istringstream bad_header("id,total,capital,ib,r\n");
    CHECK_THROWS_AS(read_balance_sheet_csv(bad_header), InvalidInput);
    std::istringstream bad_number(
        "bank_id,total_assets,capital,interbank_liabilities,tier1_ratio\nA,1x,0,0,0\n");
    CHECK_THROWS_AS(read_balance_sheet_csv(bad_number), InvalidInput);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_balance_sheet_csv(empty), InvalidInput);
}

TEST_CASE("matrix CSV round trip") {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(3, 4);
    L << 1.5, 0, 0.25, 0, 0, 2.0 / 3.0, 0, 1e-7, 7, 0, 0, 0;
    std::ostringstream out;
    write_matrix_csv(out, L);
    std::istringstream in(out.str());
    CHECK(read_matrix_csv(in, 3) == L);

    std::istringstream dup("from,to,amount\n1,0,1\n1,0,2\n");
    CHECK(read_matrix_csv(dup, 1)(0, 0) == 3.0);
    std::istringstream self("from,to,amount\n2,2,1\n");
    CHECK_THROWS_AS(read_matrix_csv(self, 2), InvalidInput);
    std::istringstream range("from,to,amount\n3,0,1\n");
    CHECK_THROWS_AS(read_matrix_csv(range, 2), InvalidInput);
    std::istringstream negative("from,to,amount\n1,0,-1\n");
    CHECK_THROWS_AS(read_matrix_csv(negative, 2), InvalidInput);
}

TEST_CASE("built network honours supplied matrices") {
    const std::vector<BalanceSheetRow> rows{{"A", 100.0, 5.0, 20.0, 0.04}, {"B", 80.0, 4.0, 20.0, 0.05}};
    const Eigen::VectorXd rates = Eigen::VectorXd::Constant(2, 0.03);

    const auto estimated = build_network(rows, rates);
    CHECK(estimated.liabilities()(0, 2) == doctest::Approx(20.0));
    CHECK(estimated.liabilities()(1, 1) == doctest::Approx(20.0));
    CHECK(estimated.liabilities()(0, 0) == doctest::Approx(75.0));

    Eigen::MatrixXd block(2, 2);
    block << 0, 12, 9, 0;
    const auto with_block = build_network(rows, rates, block);
    CHECK(with_block.liabilities()(0, 2) == 12.0);
    CHECK(with_block.liabilities()(0, 0) == doctest::Approx(75.0));

    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(2, 3);
    full << 0, 0, 5, 0, 6, 0;
    const auto filled = build_network(rows, rates, full);
    CHECK(filled.liabilities()(1, 0) == doctest::Approx(56.0));
    full(0, 0) = 1.0;
    CHECK(build_network(rows, rates, full).liabilities()(1, 0) == 0.0);

    CHECK_THROWS_AS(build_network(rows, Eigen::VectorXd::Zero(3)), InvalidInput);
    CHECK_THROWS_AS(build_network(rows, rates, Eigen::MatrixXd::Zero(3, 3)), InvalidInput);
}

TEST_CASE("property: liquid-rich calibrated banks are all Case II") {
    testing_support::Rng rng(2011);
    for (int t = 0; t < 30; ++t) {
        const int n = rng.integer(2, 30);
        std::vector<BalanceSheetRow> rows;
        for (int i = 0; i < n; ++i) {
            const double T = rng.uniform(10.0, 1000.0);
            const double ib = rng.uniform(0.05, 0.3) * T;
            // h = (1 - R)(T - ib) - C < 0 once C exceeds the illiquid part.
            const double R = rng.uniform(0.9, 0.99);
            const double C = (1.0 - R) * (T - ib) * rng.uniform(1.05, 2.0);
            rows.push_back({"b" + std::to_string(i), T, C, ib, R});
        }
        Eigen::VectorXd in(n), out(n);
        for (int i = 0; i < n; ++i) out(i) = in(i) = rows[static_cast<std::size_t>(i)].interbank_liabilities;
        if (in.maxCoeff() > 0.45 * in.sum()) continue;
        const auto net = build_network(rows, Eigen::VectorXd::Constant(n, 0.02));
        const auto sys = classify(net, BorrowingMode::Uncollateralized);
        for (auto c : sys.case_of) REQUIRE(c == BankCase::CaseII);
    }
}
