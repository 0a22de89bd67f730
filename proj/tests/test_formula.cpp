#include "dissoc/formula.hpp"

#include "dissoc/exact.hpp"
#include "dissoc/experiments.hpp"
#include "doctest.h"

using namespace dissoc;

namespace {

Valuation make_valuation(std::initializer_list<std::pair<const char*, bool>> items) {
    Valuation w;
    for (const auto& [name, value] : items) w[VarId(name)] = value;
    return w;
}

}  // namespace

TEST_CASE("parser handles infix operators and juxtaposition") {
    Formula f = parse_formula("x1 & z1 & y1 | x2 & z2 & y1");
    REQUIRE(f.kind() == Formula::Kind::Or);
    CHECK(f.children().size() == 2);
    CHECK(f.children()[0].kind() == Formula::Kind::And);
    CHECK(f.children()[0].children().size() == 3);

    Formula g = parse_formula("(x | A)(x | B)");
    REQUIRE(g.kind() == Formula::Kind::And);
    CHECK(g.children().size() == 2);
    CHECK(g.children()[0].kind() == Formula::Kind::Or);

    CHECK(parse_formula("x | y z") ==
          Formula::disj({Formula::lit(VarId("x")),
                         Formula::conj({Formula::lit(VarId("y")), Formula::lit(VarId("z"))})}));
    CHECK(parse_formula("!x y") ==
          Formula::conj({Formula::lit(VarId("x"), false), Formula::lit(VarId("y"))}));
    CHECK(parse_formula("1").is_constant(true));
    CHECK(parse_formula("0").is_constant(false));
    CHECK(parse_formula("x\xe2\x88\xa8y") == parse_formula("x | y"));
    CHECK(parse_formula("x\xe2\x88\xa7y") == parse_formula("x & y"));
    CHECK(parse_formula("\xc2\xacx") == parse_formula("!x"));
}

TEST_CASE("parser reports errors with positions") {
    CHECK_THROWS_AS(parse_formula(""), ParseError);
    CHECK_THROWS_AS(parse_formula("   "), ParseError);
    CHECK_THROWS_AS(parse_formula("x |"), ParseError);
    CHECK_THROWS_AS(parse_formula("(x"), ParseError);
    try {
        parse_formula("x | | y");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.position == 4);
    }
}

TEST_CASE("print/parse round trip preserves semantics") {
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        Formula f = random_monotone_formula(seed, 10, 6, NormalForm::Kind::Dnf);
        CHECK(semantically_equal(parse_formula(to_string(f)), f));
        Formula g = complement(f);  // exercises negative literals
        CHECK(semantically_equal(parse_formula(to_string(g)), g));
        Formula h = random_monotone_formula(seed, 8, 5, NormalForm::Kind::Cnf);
        CHECK(semantically_equal(parse_formula(to_string(h)), h));
    }
}

TEST_CASE("evaluate implements standard semantics") {
    CHECK(evaluate(parse_formula("x y"), make_valuation({{"x", true}, {"y", true}})));
    CHECK_FALSE(evaluate(parse_formula("x | y"), make_valuation({{"x", false}, {"y", false}})));
    CHECK_THROWS(evaluate(parse_formula("x y"), make_valuation({{"x", true}})));

    // (x v y1)(x v y2)(x v y3) y4 is false whenever y4 = 0, whatever x is
    Formula fc = parse_formula("(x | y1)(x | y2)(x | y3) y4");
    for (bool xv : {false, true})
        for (int m = 0; m < 8; ++m)
            CHECK_FALSE(evaluate(fc, make_valuation({{"x", xv},
                                                     {"y1", (m & 1) != 0},
                                                     {"y2", (m & 2) != 0},
                                                     {"y3", (m & 4) != 0},
                                                     {"y4", false}})));
}

TEST_CASE("restrict applies partial valuations with constant propagation") {
    Formula f = parse_formula("(x | y1)(x | y2)");
    CHECK(restrict(f, make_valuation({{"y1", false}, {"y2", true}})) == parse_formula("x"));

    Formula fc = parse_formula("(a | y1)(b | y2)(c | y3) y4");
    CHECK(restrict(fc, make_valuation({{"y1", false}, {"y2", false}, {"y3", false}, {"y4", true}}))
          == parse_formula("a b c"));

    Formula x = parse_formula("x");
    CHECK(restrict(x, {}) == x);
}

TEST_CASE("restrict respects the expansion identity") {
    // evaluate(f, nu + w) == evaluate(f[nu], w) for every completion w
    for (uint64_t seed = 1; seed <= 25; ++seed) {
        Formula f = random_monotone_formula(seed, 6, 5, NormalForm::Kind::Dnf);
        std::set<VarId> fv = vars(f);
        std::vector<VarId> order(fv.begin(), fv.end());
        size_t ny = order.size() / 2;
        for (uint32_t nu_bits = 0; nu_bits < (1u << ny); ++nu_bits) {
            Valuation nu;
            for (size_t i = 0; i < ny; ++i) nu[order[i]] = (nu_bits >> i) & 1;
            Formula fnu = restrict(f, nu);
            for (uint32_t w_bits = 0; w_bits < (1u << (order.size() - ny)); ++w_bits) {
                Valuation full = nu;
                Valuation w_only;
                for (size_t i = ny; i < order.size(); ++i) {
                    bool bit = (w_bits >> (i - ny)) & 1;
                    full[order[i]] = bit;
                    w_only[order[i]] = bit;
                }
                // the restriction depends only on the unassigned variables
                CHECK(evaluate(f, full) == evaluate(fnu, w_only));
            }
        }
    }
}

TEST_CASE("conj_valuation_function complements where the valuation is false") {
    std::vector<Formula> g{parse_formula("z1 z2"), parse_formula("z1 z3")};
    Formula gnu = conj_valuation_function(g, {false, true});
    CHECK(semantically_equal(gnu, parse_formula("z1 !z2 z3")));

    Formula all_true = conj_valuation_function(g, {true, true});
    CHECK(semantically_equal(all_true, Formula::conj({g[0], g[1]})));

    CHECK(semantically_equal(conj_valuation_function({parse_formula("y1")}, {false}),
                             parse_formula("!y1")));
    CHECK_THROWS(conj_valuation_function(g, {true}));
}

TEST_CASE("substitute maps literals through a variable renaming") {
    Formula fprime = parse_formula("(x1.1 | y1)(x1.2 | y2)(x2 | y1)(x2 | y3)");
    std::map<VarId, VarId> theta{{VarId("x1.1"), VarId("x1")}, {VarId("x1.2"), VarId("x1")}};
    Formula f = parse_formula("(x1 | y1)(x1 | y2)(x2 | y1)(x2 | y3)");
    CHECK(substitute(fprime, theta) == f);
    CHECK(substitute(f, {}) == f);

    // two dissociations of the same function substitute back to their sources
    Formula phi_prime = parse_formula("(x'1 | y1)(x'2 | y2)(x'3 | y3)(y4 | y5)");
    std::map<VarId, VarId> theta1{{VarId("x'1"), VarId("x")},
                                  {VarId("x'2"), VarId("x")},
                                  {VarId("x'3"), VarId("x")}};
    CHECK(substitute(phi_prime, theta1) == parse_formula("(x | y1)(x | y2)(x | y3)(y4 | y5)"));

    Formula psi_prime = parse_formula("x'1 y4 | x'2 y5 | y1 y2 y3 y4 | y1 y2 y3 y5");
    std::map<VarId, VarId> theta2{{VarId("x'1"), VarId("x")}, {VarId("x'2"), VarId("x")}};
    CHECK(substitute(psi_prime, theta2) ==
          parse_formula("x y4 | x y5 | y1 y2 y3 y4 | y1 y2 y3 y5"));
}

TEST_CASE("minimize_monotone_dnf produces absorption-free prime implicants") {
    NormalForm nf = minimize_monotone_dnf(parse_formula("x y | x"));
    CHECK(nf.clauses == std::vector<std::vector<VarId>>{{VarId("x")}});

    NormalForm nf2 = minimize_monotone_dnf(parse_formula("x (y1 | y2)"));
    CHECK(nf2.clauses == std::vector<std::vector<VarId>>{{VarId("x"), VarId("y1")},
                                                         {VarId("x"), VarId("y2")}});

    // equivalent CNF and DNF expressions minimize to the same clause set
    Formula phi = parse_formula("(x | y1)(x | y2)(x | y3)(y4 | y5)");
    Formula psi = parse_formula("x y4 | x y5 | y1 y2 y3 y4 | y1 y2 y3 y5");
    CHECK(minimize_monotone_dnf(phi) == minimize_monotone_dnf(psi));

    CHECK_THROWS(minimize_monotone_dnf(parse_formula("!x | y")));
}

TEST_CASE("minimize_monotone_dnf is equivalent to its input and absorption-free") {
    for (uint64_t seed = 1; seed <= 40; ++seed) {
        Formula f = random_monotone_formula(seed, 8, 6,
                                            seed % 2 ? NormalForm::Kind::Dnf
                                                     : NormalForm::Kind::Cnf);
        NormalForm nf = minimize_monotone_dnf(f);
        CHECK(semantically_equal(to_formula(nf), f));
        for (size_t i = 0; i < nf.clauses.size(); ++i)
            for (size_t j = 0; j < nf.clauses.size(); ++j)
                if (i != j)
                    CHECK_FALSE(std::includes(nf.clauses[i].begin(), nf.clauses[i].end(),
                                              nf.clauses[j].begin(), nf.clauses[j].end()));
    }
}

TEST_CASE("minimize_monotone_dnf rejects oversized expansions") {
    // (a1|b1)(a2|b2)...(a17|b17) has 2^17 DNF clauses
    std::vector<Formula> factors;
    for (int i = 0; i < 17; ++i)
        factors.push_back(Formula::disj({Formula::lit(VarId("a" + std::to_string(i))),
                                         Formula::lit(VarId("b" + std::to_string(i)))}));
    CHECK_THROWS(minimize_monotone_dnf(Formula::conj(factors)));
}

TEST_CASE("primal_graph connects co-occurring variables") {
    NormalForm nf = minimize_monotone_dnf(parse_formula("x1 y1 | x1 y2 | x2 y2"));
    PrimalGraph g = primal_graph(nf);
    CHECK(g.nodes.size() == 4);
    CHECK(g.edges.size() == 3);  // a path: x2 - y2 - x1 - y1
    CHECK(g.has_edge(VarId("x1"), VarId("y1")));
    CHECK(g.has_edge(VarId("x1"), VarId("y2")));
    CHECK(g.has_edge(VarId("x2"), VarId("y2")));
    CHECK_FALSE(g.has_edge(VarId("x1"), VarId("x2")));

    PrimalGraph single = primal_graph(minimize_monotone_dnf(parse_formula("x y")));
    CHECK(single.edges.size() == 1);

    // a positive-partite 2CNF has a bipartite primal graph
    auto cnf = as_normal_form(parse_formula("(x1 | y1)(x1 | y2)(x2 | y1)(x2 | y3)"),
                              NormalForm::Kind::Cnf);
    REQUIRE(cnf.has_value());
    PrimalGraph bip = primal_graph(*cnf);
    CHECK(bip.edges.size() == 4);
    CHECK(bip.has_edge(VarId("x1"), VarId("y1")));
    CHECK(bip.has_edge(VarId("x1"), VarId("y2")));
    CHECK(bip.has_edge(VarId("x2"), VarId("y1")));
    CHECK(bip.has_edge(VarId("x2"), VarId("y3")));
    CHECK_FALSE(bip.has_edge(VarId("x1"), VarId("x2")));
    CHECK_FALSE(bip.has_edge(VarId("y1"), VarId("y2")));
}

TEST_CASE("ior combines independent disjunctions") {
    CHECK(ior({0.5}) == doctest::Approx(0.5));
    CHECK(ior({}) == 0.0);
    CHECK(ior({0.1, 0.2}) == doctest::Approx(0.28));  // 1 - 0.9 * 0.8

    // symmetric, monotone, and ignores zeros
    CHECK(ior({0.3, 0.7, 0.2}) == doctest::Approx(ior({0.7, 0.2, 0.3})));
    CHECK(ior({0.3, 0.7}) < ior({0.4, 0.7}));
    CHECK(ior({0.3, 0.7, 0.0}) == doctest::Approx(ior({0.3, 0.7})));
}

TEST_CASE("disjoint declarations encode into independent chain variables") {
    DisjointDeclaration d{{"v1", "v2", "v3", "v4"}, {0.2, 0.5, 0.2, 0.1}};
    DisjointEncoding enc = encode_disjoint_declaration(d);
    REQUIRE(enc.z_vars.size() == 3);
    CHECK(enc.z_probs[enc.z_vars[0]] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(enc.z_probs[enc.z_vars[1]] == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(enc.z_probs[enc.z_vars[2]] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // P[A_i] reproduces the declaration; events are disjoint and exhaustive
    REQUIRE(enc.events.size() == 4);
    double total = 0.0;
    for (size_t i = 0; i < enc.events.size(); ++i) {
        double pi = brute_force_prob(enc.events[i], enc.z_probs);
        CHECK(pi == doctest::Approx(d.probs[i]).epsilon(1e-12));
        total += pi;
        for (size_t j = i + 1; j < enc.events.size(); ++j) {
            Formula both = Formula::conj({enc.events[i], enc.events[j]});
            CHECK(brute_force_prob(both, enc.z_probs) == 0.0);
        }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disjoint declaration edge cases") {
    DisjointEncoding single = encode_disjoint_declaration({{"v"}, {1.0}});
    CHECK(single.z_vars.empty());
    REQUIRE(single.events.size() == 1);
    CHECK(single.events[0].is_constant(true));

    DisjointEncoding two = encode_disjoint_declaration({{"a", "b"}, {0.3, 0.7}});
    REQUIRE(two.z_vars.size() == 1);
    CHECK(two.z_probs[two.z_vars[0]] == doctest::Approx(0.3));
    CHECK(brute_force_prob(two.events[1], two.z_probs) == doctest::Approx(0.7));

    // a prefix summing to 1 forces the remaining chain probabilities to 0
    DisjointEncoding degen = encode_disjoint_declaration({{"a", "b", "c"}, {0.4, 0.6, 0.0}});
    CHECK(degen.z_probs[degen.z_vars[1]] == doctest::Approx(0.6 / 0.6));
    CHECK(brute_force_prob(degen.events[2], degen.z_probs) == doctest::Approx(0.0));

    CHECK_THROWS(encode_disjoint_declaration({{"a", "b"}, {0.5, 0.6}}));
    CHECK_THROWS(encode_disjoint_declaration({{"a"}, {-0.1}}));
}
