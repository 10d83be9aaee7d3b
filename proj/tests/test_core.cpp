#include <doctest.h>

#include <cmath>
#include <vector>

#include "pcs/chisq.hpp"
#include "pcs/dataset.hpp"
#include "pcs/moments.hpp"
#include "pcs/rng.hpp"

using namespace pcs;

namespace {

Dataset make_dataset(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = rows.size();
    const auto p = rows.begin()->size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return Dataset(std::move(m));
}

// independent quantile oracle: Simpson quadrature of the chi-square density
// plus bisection on the integral
double chisq_quantile_oracle(double prob, std::size_t dof) {
    const double k = static_cast<double>(dof);
    auto pdf = [k](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp((0.5 * k - 1.0) * std::log(x) - 0.5 * x -
                        std::lgamma(0.5 * k) - 0.5 * k * std::log(2.0));
    };
    auto cdf = [&](double x) {
        const int steps = 20000;
        const double hstep = x / steps;
        double acc = pdf(0.0) + pdf(x);
        for (int i = 1; i < steps; ++i) {
            acc += (i % 2 == 1 ? 4.0 : 2.0) * pdf(i * hstep);
        }
        return acc * hstep / 3.0;
    };
    double lo = 0.0, hi = 20.0 * (k + 10.0);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("default_h") {
    CHECK(default_h(100, 2, 0.5) == 51);
    CHECK(default_h(100, 4, 1.0) == 100);
    CHECK(default_h(100, 4, 0.75) == 75);
    CHECK(default_h(103, 10, 0.5) == 57);
    CHECK_THROWS_AS(default_h(4, 4, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(default_h(100, 4, 0.4), std::invalid_argument);
}

TEST_CASE("subset_moments basics") {
    SUBCASE("basis vectors plus origin") {
        const Dataset d = make_dataset({{1, 0}, {0, 1}, {0, 0}});
        const LocationScatter ls = subset_moments(d, SubsetIndex::full(3));
        CHECK(ls.center()[0] == doctest::Approx(1.0 / 3.0));
        CHECK(ls.center()[1] == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("identical rows give singular zero scatter") {
        const Dataset d = make_dataset({{2.0}, {2.0}});
        const LocationScatter ls = subset_moments(d, SubsetIndex::full(2));
        CHECK(ls.scatter()(0, 0) == doctest::Approx(0.0));
        CHECK(ls.singular());
    }
    SUBCASE("square corners") {
        const Dataset d = make_dataset({{0, 0}, {2, 0}, {0, 2}, {2, 2}});
        const LocationScatter ls = subset_moments(d, SubsetIndex::full(4));
        CHECK(ls.center()[0] == doctest::Approx(1.0));
        CHECK(ls.center()[1] == doctest::Approx(1.0));
        CHECK(ls.scatter()(0, 0) == doctest::Approx(4.0 / 3.0));
        CHECK(ls.scatter()(1, 1) == doctest::Approx(4.0 / 3.0));
        CHECK(ls.scatter()(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("too small subset rejected") {
        const Dataset d = make_dataset({{0, 0}, {2, 0}, {0, 2}});
        CHECK_THROWS_AS(subset_moments(d, SubsetIndex({0, 1})), DegenerateSubsetError);
    }
}

TEST_CASE("mahalanobis_sq") {
    Eigen::VectorXd t(2);
    t << 1.0, -1.0;
    SUBCASE("center is at distance zero") {
        const LocationScatter ls(t, Eigen::MatrixXd::Identity(2, 2));
        CHECK(mahalanobis_sq(t, ls) == doctest::Approx(0.0));
    }
    SUBCASE("identity scatter reduces to euclidean") {
        const LocationScatter ls(t, Eigen::MatrixXd::Identity(2, 2));
        Eigen::VectorXd x(2);
        x << 4.0, 3.0;  // offset (3, 4)
        CHECK(mahalanobis_sq(x, ls) == doctest::Approx(25.0));
    }
    SUBCASE("diagonal scatter") {
        Eigen::MatrixXd s(2, 2);
        s << 4.0, 0.0, 0.0, 1.0;
        const LocationScatter ls(t, s);
        Eigen::VectorXd x(2);
        x << 3.0, 0.0;  // offset (2, 1)
        CHECK(mahalanobis_sq(x, ls) == doctest::Approx(2.0));
    }
    SUBCASE("singular scatter throws") {
        const LocationScatter ls(t, Eigen::MatrixXd::Zero(2, 2));
        CHECK_THROWS_AS(mahalanobis_sq(t, ls), SingularScatterError);
    }
}

TEST_CASE("chisq_quantile") {
    CHECK(chisq_quantile(0.5, 2) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
    // frozen from the quadrature + bisection oracle below
    CHECK(chisq_quantile(0.99, 10) == doctest::Approx(23.209251158954356).epsilon(1e-9));
    CHECK(chisq_quantile(0.975, 4) == doctest::Approx(11.143286781877796).epsilon(1e-9));
    CHECK(std::fabs(chisq_quantile(0.99, 10) - chisq_quantile_oracle(0.99, 10)) < 1e-6);
    CHECK(std::fabs(chisq_quantile(0.975, 4) - chisq_quantile_oracle(0.975, 4)) < 1e-6);
    CHECK_THROWS_AS(chisq_quantile(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(chisq_quantile(1.0, 4), std::invalid_argument);

    SUBCASE("strictly increasing in prob") {
        for (std::size_t dof : {1u, 2u, 5u, 10u, 20u}) {
            double prev = 0.0;
            for (double prob = 0.05; prob < 1.0; prob += 0.05) {
                const double q = chisq_quantile(prob, dof);
                CHECK(q > prev);
                prev = q;
            }
        }
    }
}

TEST_CASE("reweight_hard_threshold") {
    SUBCASE("single far point excluded") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(21, 2);  // 20 rows at t_*
        x(20, 0) = 100.0;
        const Dataset d{x};
        const LocationScatter ls(Eigen::VectorXd::Zero(2),
                                 1e-4 * Eigen::MatrixXd::Identity(2, 2));
        const SubsetIndex j = reweight_hard_threshold(d, ls);
        CHECK(j.size() == 20);
        CHECK(!j.contains(20));
    }
    SUBCASE("single point at center") {
        Eigen::MatrixXd x(1, 1);
        x << 3.0;
        Eigen::VectorXd t(1);
        t << 3.0;
        const LocationScatter ls(t, Eigen::MatrixXd::Identity(1, 1));
        const SubsetIndex j = reweight_hard_threshold(Dataset{x}, ls);
        CHECK(j.size() == 1);
        CHECK(j.contains(0));
    }
    SUBCASE("coverage near 0.975 under the fitted model") {
        // Monte-Carlo oracle: i.i.d. draws from the fitted normal model
        const std::size_t p = 4, n = 1000, reps = 1000;
        Rng rng(123);
        const LocationScatter ls(Eigen::VectorXd::Zero(4),
                                 Eigen::MatrixXd::Identity(4, 4));
        double total = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            Eigen::MatrixXd x(n, p);
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                x(i / p, i % p) = rng.normal();
            }
            total += static_cast<double>(
                         reweight_hard_threshold(Dataset{x}, ls).size()) /
                     static_cast<double>(n);
        }
        CHECK(total / reps == doctest::Approx(0.975).epsilon(0.031));
    }
    SUBCASE("invariant under global rescaling") {
        Rng rng(5);
        Eigen::MatrixXd x(40, 3);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
        }
        x.row(39) *= 30.0;
        const Dataset d{x};
        const LocationScatter fit = subset_moments(d, SubsetIndex::full(39));
        const SubsetIndex j1 = reweight_hard_threshold(d, fit);
        const double c = 3.7;
        const Dataset d2{Eigen::MatrixXd(c * x)};
        const LocationScatter fit2(c * fit.center(),
                                   Eigen::MatrixXd(c * c * fit.scatter()));
        const SubsetIndex j2 = reweight_hard_threshold(d2, fit2);
        CHECK(j1 == j2);
    }
}

TEST_CASE("trace identity of subset moments") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t p = 1 + rng.below(4);
        const std::size_t n = p + 2 + rng.below(30);
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
        }
        const Dataset d{x};
        const SubsetIndex H = SubsetIndex::full(n);
        const LocationScatter ls = subset_moments(d, H);
        double sum = 0.0;
        for (std::size_t i : H) sum += mahalanobis_sq(d.row(i).transpose(), ls);
        const double expected = static_cast<double>(p) * static_cast<double>(n - 1);
        CHECK(sum == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("mahalanobis affine invariance") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = 2 + rng.below(3);
        const std::size_t n = 3 * p + 5;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
        }
        Eigen::MatrixXd b(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
            for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = rng.normal();
        }
        if (std::fabs(b.determinant()) < 1e-3) continue;
        Eigen::VectorXd c(static_cast<Eigen::Index>(p));
        for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = rng.normal();

        const Dataset d{x};
        const Dataset dt{Eigen::MatrixXd(
            (x * b.transpose()).rowwise() + c.transpose())};
        const SubsetIndex H = SubsetIndex::full(n);
        const LocationScatter ls = subset_moments(d, H);
        const LocationScatter lst = subset_moments(dt, H);
        for (std::size_t i = 0; i < n; ++i) {
            const double a0 = mahalanobis_sq(d.row(i).transpose(), ls);
            const double a1 = mahalanobis_sq(dt.row(i).transpose(), lst);
            CHECK(a1 == doctest::Approx(a0).epsilon(1e-6));
        }
    }
}
