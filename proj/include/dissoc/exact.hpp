// Exact probability computation: world enumeration, Shannon expansion,
// read-once factorization, conditional probabilities.

#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "dissoc/formula.hpp"

namespace dissoc {

// Flattened formula over an indexed variable order (the sorted variable set),
// evaluable against a world bitmask. Used by the enumeration oracle.
class CompiledFormula {
public:
    explicit CompiledFormula(const Formula& f);

    const std::vector<VarId>& variables() const { return variables_; }
    bool evaluate(uint32_t world) const;

    // Sum over all worlds of the world weight times the truth value; probs
    // is indexed like variables().
    double probability(std::span<const double> probs) const;

private:
    enum class Op : uint8_t { True, False, Lit, And, Or };
    struct Instr {
        Op op;
        int var = -1;       // Lit
        bool positive = true;
        int first_child = 0, num_children = 0;  // And/Or: indices into child_slots_
    };
    int build(const Formula& f, const std::map<VarId, int>& index);
    bool eval_node(int node, uint32_t world) const;

    std::vector<VarId> variables_;
    std::vector<Instr> instrs_;
    std::vector<int> child_slots_;
    int root_ = 0;
};

// Enumeration oracle: sum over all 2^n worlds. Throws when the formula has
// more than max_vars variables or a probability is missing.
double brute_force_prob(const Formula& f, const ProbMap& p, int max_vars = 24);

// Recursive Shannon expansion with memoization and constant short-circuits.
// Pivot: most frequent variable, ties by lexicographic id. Throws when more
// than node_budget subformulas get expanded.
double shannon_prob(const Formula& f, const ProbMap& p, size_t node_budget = 1u << 22);

// Factorized formula in which every variable occurs exactly once.
class ReadOnceTree {
public:
    enum class Kind { Leaf, And, Or };

    static ReadOnceTree leaf(VarId v);
    static ReadOnceTree conj(std::vector<ReadOnceTree> children);
    static ReadOnceTree disj(std::vector<ReadOnceTree> children);

    Kind kind() const { return kind_; }
    const VarId& var() const { return var_; }
    const std::vector<ReadOnceTree>& children() const { return children_; }

    Formula to_formula() const;
    std::set<VarId> vars() const;

private:
    Kind kind_ = Kind::Leaf;
    VarId var_;
    std::vector<ReadOnceTree> children_;
};

// Recursive factorization of an absorption-free monotone clause set (either
// kind). Splits on variable-disjoint clause groups, factors out variables
// common to all clauses (smallest id first), and otherwise looks for a
// decomposition of the dual clause set. Returns nullopt when no case applies.
std::optional<ReadOnceTree> readonce_factorize(const NormalForm& nf,
                                               size_t dual_clause_limit = size_t{1} << 16);

// Leaf -> p, And -> product, Or -> independent-or.
double readonce_prob(const ReadOnceTree& t, const ProbMap& p);

// P[x and f] / P[f]; throws when P[f] = 0.
double conditional_prob(const VarId& x, const Formula& f, const ProbMap& p);

// Expansion by the y-variables: sum over all valuations nu of y of
// P[f[nu]] * P[y^nu]. x_probs and y_probs must partition vars(f).
double prob_by_y_expansion(const Formula& f, const ProbMap& x_probs, const ProbMap& y_probs,
                           int max_y = 20);

}  // namespace dissoc
