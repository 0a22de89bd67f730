#include "dissoc/experiments.hpp"

#include <cmath>
#include <fstream>

#include "dissoc/dissociation.hpp"
#include "dissoc/exact.hpp"
#include "doctest.h"

using namespace dissoc;

namespace {

ProbMap uniform_probs(const Formula& f, double p) {
    ProbMap out;
    for (const auto& v : vars(f)) out[v] = p;
    return out;
}

const GridSummary& summary_for(const std::vector<GridSummary>& summaries,
                               const std::string& method) {
    for (const auto& s : summaries)
        if (s.method == method) return s;
    REQUIRE_MESSAGE(false, "missing summary " << method);
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("rho_min matches the admissibility condition") {
    CHECK(rho_min(0.2) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(rho_min(0.5) == doctest::Approx(-1.0).epsilon(1e-12));
    // high q: disjointness impossible, the lower limit comes from P[A v B] <= 1
    CHECK(rho_min(0.8) == doctest::Approx(-(1.0 + 0.64 - 1.6) / (0.8 - 0.64)).epsilon(1e-12));
}

TEST_CASE("ex71 evaluates the correlation closed forms") {
    auto rows = ex71(0.3, 0.4, {0.0});
    REQUIRE(rows.size() == 2);
    const CorrelationPoint& dnf = rows[0];
    CHECK_FALSE(dnf.cnf);
    // independent A, B: P[AB] = q^2
    CHECK(dnf.p_ab == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(dnf.exact == doctest::Approx(2 * 0.3 * 0.4 - 0.3 * 0.16).epsilon(1e-12));

    // the bounds bracket the exact value over the admissible range
    for (double p : {0.2, 0.5, 0.8}) {
        for (double q : {0.2, 0.5, 0.8}) {
            double lo = rho_min(q);
            std::vector<double> grid;
            for (int i = 0; i <= 20; ++i) grid.push_back(lo + (1.0 - lo) * i / 20.0);
            for (const auto& row : ex71(p, q, grid)) {
                CHECK(row.lower <= row.exact + 1e-12);
                CHECK(row.exact <= row.upper + 1e-12);
            }
        }
    }
    CHECK_THROWS(ex71(0.3, 0.2, {-0.5}));  // below rho_min(0.2) = -0.25
}

TEST_CASE("ex71 bounds become tight for identical events") {
    // at rho = 1 the events coincide; verify against the enumeration oracle
    // on the concrete instance with A = B = a
    const double p = 0.35, q = 0.6;
    auto rows = ex71(p, q, {1.0});
    const CorrelationPoint& dnf = rows[0];
    const CorrelationPoint& cnf = rows[1];

    Formula fd = parse_formula("x a | x a");
    Formula fc = parse_formula("(x | a)(x | a)");
    ProbMap probs{{VarId("x"), p}, {VarId("a"), q}};
    CHECK(dnf.exact == doctest::Approx(brute_force_prob(fd, probs)).epsilon(1e-12));
    CHECK(cnf.exact == doctest::Approx(brute_force_prob(fc, probs)).epsilon(1e-12));

    // CNF upper and DNF lower coincide with the exact value here
    CHECK(cnf.upper == doctest::Approx(cnf.exact).epsilon(1e-12));
    CHECK(dnf.lower == doctest::Approx(dnf.exact).epsilon(1e-12));

    // and equal the dissociated formulas evaluated by the oracle
    Formula fdp = parse_formula("x'1 a | x'2 a");
    ProbMap dl{{VarId("x'1"), 1 - std::sqrt(1 - p)},
               {VarId("x'2"), 1 - std::sqrt(1 - p)},
               {VarId("a"), q}};
    CHECK(dnf.lower == doctest::Approx(brute_force_prob(fdp, dl)).epsilon(1e-12));
    Formula fcp = parse_formula("(x'1 | a)(x'2 | a)");
    ProbMap cu{{VarId("x'1"), std::sqrt(p)}, {VarId("x'2"), std::sqrt(p)}, {VarId("a"), q}};
    CHECK(cnf.upper == doctest::Approx(brute_force_prob(fcp, cu)).epsilon(1e-12));
}

TEST_CASE("ex72 grid reproduces the reported error statistics") {
    Ex72Result res = ex72_grid();
    CHECK(res.points.size() == 14641);

    const GridSummary& du = summary_for(res.summaries, "dissociation_upper");
    CHECK(std::abs(du.avg_rel_err_pct - 0.73) <= 0.05);
    CHECK(std::abs(du.worst_rel_err_pct - 6.7) <= 1.0);
    const GridSummary& mu = summary_for(res.summaries, "model_upper");
    CHECK(std::abs(mu.avg_rel_err_pct - 4.55) <= 0.05);
    CHECK(std::abs(mu.worst_rel_err_pct - 289.3) <= 1.0);

    // lower bounds are only slightly better than model-based ones
    const GridSummary& dl = summary_for(res.summaries, "dissociation_lower");
    const GridSummary& ml = summary_for(res.summaries, "model_lower");
    CHECK(dl.avg_rel_err_pct <= ml.avg_rel_err_pct);

    // pointwise: brackets hold and dissociation dominates the model bounds
    for (const auto& pt : res.points) {
        CHECK(pt.diss_lower <= pt.exact + 1e-12);
        CHECK(pt.exact <= pt.diss_upper + 1e-12);
        CHECK(pt.model_lower <= pt.exact + 1e-12);
        CHECK(pt.exact <= pt.model_upper + 1e-12);
        CHECK(pt.diss_upper <= pt.model_upper + 1e-12);
        CHECK(pt.diss_lower >= pt.model_lower - 1e-12);
    }

    // the all-ones corner is exact for every method
    const GridPoint& last = res.points.back();
    CHECK(last.p1 == 1.0);
    CHECK(last.exact == doctest::Approx(1.0));
    CHECK(last.diss_upper == doctest::Approx(1.0));
    CHECK(last.model_upper == doctest::Approx(1.0));
}

TEST_CASE("ex72 closed forms match the enumeration oracle at sample points") {
    Formula phi = parse_formula("x1 y1 | x2 y1 | x2 y2");
    Ex72Result res = ex72_grid();
    // sample a few grid points and re-derive the exact value by enumeration
    for (size_t idx : {137u, 4000u, 9999u, 14000u}) {
        const GridPoint& pt = res.points[idx];
        ProbMap probs{{VarId("x1"), pt.p1},
                      {VarId("x2"), pt.p2},
                      {VarId("y1"), pt.q1},
                      {VarId("y2"), pt.q2}};
        CHECK(pt.exact == doctest::Approx(brute_force_prob(phi, probs)).epsilon(1e-12));
    }
}

TEST_CASE("ex73 grid reproduces the conjunctive statistics and CNF equivalence") {
    Ex73Result res = ex73_grid();
    const GridSummary& cu = summary_for(res.summaries, "conjunctive_upper");
    CHECK(std::abs(cu.avg_rel_err_pct - 2.69) <= 0.05);
    CHECK(std::abs(cu.worst_rel_err_pct - 54.5) <= 1.0);
    CHECK(res.max_exact_mismatch <= 1e-12);

    // the CNF expression denotes the same function as the DNF lineage
    Formula psi = parse_formula("(x1 | x2)(y1 | x2)(y1 | y2)");
    Formula phi = parse_formula("x1 y1 | x2 y1 | x2 y2");
    CHECK(semantically_equal(psi, phi));
    Rng rng(404);
    for (int rep = 0; rep < 8; ++rep) {
        ProbMap probs{{VarId("x1"), rng.unit()},
                      {VarId("x2"), rng.unit()},
                      {VarId("y1"), rng.unit()},
                      {VarId("y2"), rng.unit()}};
        CHECK(brute_force_prob(psi, probs) ==
              doctest::Approx(brute_force_prob(phi, probs)).epsilon(1e-12));
    }
}

TEST_CASE("ex74 recurrence equals the enumeration oracle") {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (int n = 1; n <= 6; ++n) {
            Formula phi = path_dnf(n);
            CHECK(ex74_exact(p, n) ==
                  doctest::Approx(brute_force_prob(phi, uniform_probs(phi, p))).epsilon(1e-9));
        }
    }
    CHECK(ex74_exact(0.3, 1) == doctest::Approx(0.09).epsilon(1e-12));  // p1 = p^2
}

TEST_CASE("ex74 dissociation closed form matches the pipeline evaluation") {
    for (double p : {0.2, 0.6}) {
        for (int n : {2, 3, 5}) {
            Formula phi = path_dnf(n);
            std::set<VarId> xs;
            for (int i = 1; i < n; ++i) xs.insert(VarId("x" + std::to_string(i)));
            ProbMap probs = uniform_probs(phi, p);
            BoundReport up = bound_pipeline(phi, probs, xs, Direction::Upper);
            BoundReport lo = bound_pipeline(phi, probs, xs, Direction::Lower);
            CHECK(up.bound == doctest::Approx(ex74_bound(p, n, true)).epsilon(1e-12));
            CHECK(lo.bound == doctest::Approx(ex74_bound(p, n, false)).epsilon(1e-12));
        }
    }
}

TEST_CASE("ex74 series brackets the exact value") {
    auto rows = ex74(0.3, 20);
    REQUIRE(rows.size() == 20);
    for (const auto& r : rows) {
        CHECK(r.lower <= r.exact + 1e-12);
        CHECK(r.exact <= r.upper + 1e-12);
    }
}

TEST_CASE("ex74 target mode pins the exact probability at r") {
    auto rows = ex74_target(0.5, {1, 2, 10, 100, 10000});
    for (const auto& r : rows) CHECK(r.exact == doctest::Approx(0.5).epsilon(1e-9));
    const SeriesRow& big = rows.back();
    CHECK(std::abs(big.upper - 0.5) <= 0.005);
    CHECK(std::abs(big.lower - 0.2929) <= 0.005);
    CHECK_THROWS(ex74_target(1.5, {3}));
}

TEST_CASE("ex75 closed forms match the enumeration oracle for small n") {
    for (int n = 1; n <= 3; ++n) {
        auto rows = ex75(0.5, {n});
        const SeriesRow& r = rows.front();
        Formula phi = bipartite_dnf(n);
        CHECK(r.exact ==
              doctest::Approx(brute_force_prob(phi, uniform_probs(phi, r.p))).epsilon(1e-9));
        CHECK(r.exact == doctest::Approx(0.5).epsilon(1e-12));  // pinned by construction
        CHECK(r.lower <= r.exact + 1e-12);
        CHECK(r.exact <= r.upper + 1e-12);
    }
    // n = 1: single clause, no dissociation happens
    auto one = ex75(0.5, {1}).front();
    CHECK(one.upper == doctest::Approx(one.exact).epsilon(1e-12));
    CHECK(one.lower == doctest::Approx(one.exact).epsilon(1e-12));
}

TEST_CASE("ex75 upper bounds approach the limit value") {
    CHECK(ex75_limit(0.5) == doctest::Approx(0.5803).epsilon(1e-3));
    auto rows = ex75(0.5, {10, 100, 10000});
    double limit = ex75_limit(0.5);
    double prev = 0.0;
    for (const auto& r : rows) {
        CHECK(r.upper >= prev - 1e-12);  // monotone in n
        CHECK(r.upper <= limit + 1e-9);
        prev = r.upper;
    }
    CHECK(std::abs(rows.back().upper - limit) <= 1e-3);
}

TEST_CASE("gen_pp2cnf builds the positive partite clause set") {
    CHECK(gen_pp2cnf({{1, 1}}) == parse_formula("x1 | y1"));
    Formula f = gen_pp2cnf({{1, 1}, {1, 2}, {2, 1}, {2, 3}});
    CHECK(f == parse_formula("(x1 | y1)(x1 | y2)(x2 | y1)(x2 | y3)"));
    Formula k22 = gen_pp2cnf({{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    auto nf = as_normal_form(k22, NormalForm::Kind::Cnf);
    REQUIRE(nf.has_value());
    CHECK(nf->clauses.size() == 4);
}

TEST_CASE("random_monotone_formula is reproducible and respects budgets") {
    for (uint64_t seed : {1ull, 42ull, 987654321ull}) {
        Formula a = random_monotone_formula(seed, 10, 6, NormalForm::Kind::Dnf);
        Formula b = random_monotone_formula(seed, 10, 6, NormalForm::Kind::Dnf);
        CHECK(a == b);
        CHECK(to_string(a) == to_string(b));
        CHECK(is_monotone(a));
        CHECK(vars(a).size() <= 10);
    }
    Formula cnf = random_monotone_formula(7, 5, 4, NormalForm::Kind::Cnf);
    CHECK(is_monotone(cnf));
    CHECK_THROWS(random_monotone_formula(1, 0, 3, NormalForm::Kind::Dnf));
}

TEST_CASE("ex74 csv output is stable") {
    std::ifstream in(std::string(DISSOC_TEST_DIR) + "/golden/ex74_p03_n5.csv");
    REQUIRE(in.good());
    std::string golden(std::istreambuf_iterator<char>(in), {});
    CHECK(series_csv(ex74(0.3, 5), false) == golden);
}

TEST_CASE("csv renderings carry the documented headers") {
    CHECK(ex71_csv(ex71(0.3, 0.4, {0.0})).rfind("variant,p,q,rho,pab,exact,upper,lower\n", 0) ==
          0);
    CHECK(series_csv(ex74(0.3, 3), false).rfind("n,p,exact,upper,lower\n", 0) == 0);
    CHECK(series_csv(ex75(0.5, {2}), true).rfind("n,p,exact,upper,lower,limit\n", 0) == 0);
    Ex73Result r73 = ex73_grid();
    CHECK(grid_summary_csv(r73.summaries).rfind("method,avg_rel_err_pct,worst_rel_err_pct,points\n",
                                                0) == 0);
}
