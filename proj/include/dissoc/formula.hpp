// Boolean formulas over independent random variables: representation,
// parsing/printing, valuations, substitution, monotone normal forms and
// the independent-or combinator.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dissoc {

// Opaque variable identifier. Ordering is lexicographic on the name and is
// used wherever a deterministic variable order is required.
class VarId {
public:
    VarId() = default;
    explicit VarId(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    friend bool operator==(const VarId& a, const VarId& b) { return a.name_ == b.name_; }
    friend bool operator!=(const VarId& a, const VarId& b) { return a.name_ != b.name_; }
    friend bool operator<(const VarId& a, const VarId& b) { return a.name_ < b.name_; }

private:
    std::string name_;
};

std::ostream& operator<<(std::ostream& os, const VarId& v);

// Truth assignment for a subset of variables (total on its declared domain).
using Valuation = std::map<VarId, bool>;

// Per-variable probability in [0,1].
using ProbMap = std::map<VarId, double>;

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, size_t position)
        : std::runtime_error(msg), position(position) {}
    size_t position;
};

// Immutable expression tree. And/Or nodes have at least one child; negation
// lives in literal polarity only (general complement is pushed to literals
// by De Morgan, see complement()).
class Formula {
public:
    enum class Kind { True, False, Lit, And, Or };

    Formula() : Formula(constant(false)) {}

    static Formula constant(bool value);
    static Formula lit(VarId v, bool positive = true);
    static Formula conj(std::vector<Formula> children);
    static Formula disj(std::vector<Formula> children);

    Kind kind() const { return node_->kind; }
    const VarId& var() const { return node_->var; }
    bool positive() const { return node_->positive; }
    const std::vector<Formula>& children() const { return node_->children; }

    bool is_constant(bool value) const;

    // Structural equality.
    friend bool operator==(const Formula& a, const Formula& b);
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

private:
    struct Node {
        Kind kind;
        VarId var;        // Lit
        bool positive = true;
        std::vector<Formula> children;  // And/Or
    };
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Grammar (see docs/grammar.md): '|' or '∨' for disjunction, '&' or '∧' or
// juxtaposition for conjunction, '!' or '¬' for negation, '0'/'1' constants,
// identifiers [A-Za-z_][A-Za-z0-9_.']*. Precedence: ! > and > or.
Formula parse_formula(std::string_view text);

// Printer inverse to parse_formula; conjunction is printed as juxtaposition.
std::string to_string(const Formula& f);
std::ostream& operator<<(std::ostream& os, const Formula& f);

std::set<VarId> vars(const Formula& f);
bool is_monotone(const Formula& f);
bool is_monotone_in(const Formula& f, const VarId& v);
int count_occurrences(const Formula& f, const VarId& v);

// Negation in NNF: constants flip, literal polarity flips, And/Or dualize.
Formula complement(const Formula& f);

// Total evaluation; throws if a variable of f is missing from w.
bool evaluate(const Formula& f, const Valuation& w);

// Partial substitution f[nu] with constant propagation; the result depends
// only on the unassigned variables.
Formula restrict(const Formula& f, const Valuation& nu);

// g^nu = AND_j of g[j], complementing g[j] where nu[j] is false. Positional:
// nu[j] belongs to g[j]; throws on length mismatch.
Formula conj_valuation_function(const std::vector<Formula>& g, const std::vector<bool>& nu);

// Replaces every literal on a mapped variable by its image.
Formula substitute(const Formula& f, const std::map<VarId, VarId>& theta);

// Exhaustive semantic equivalence over the union of both variable sets.
// Intended for small formulas; throws above max_vars.
bool semantically_equal(const Formula& a, const Formula& b, int max_vars = 20);

// ---------------------------------------------------------------------------
// Monotone normal forms
// ---------------------------------------------------------------------------

// Clause sets over positive literals. For Dnf a clause is a conjunct of the
// top-level disjunction, for Cnf a disjunct of the top-level conjunction.
// Clauses and the clause list are kept sorted; absorption-free after minimize.
struct NormalForm {
    enum class Kind { Dnf, Cnf };
    Kind kind = Kind::Dnf;
    std::vector<std::vector<VarId>> clauses;

    friend bool operator==(const NormalForm&, const NormalForm&) = default;
};

Formula to_formula(const NormalForm& nf);

// Reads a formula that is syntactically in the given normal form (allowing
// degenerate single-literal / single-clause shapes); nullopt on mismatch.
std::optional<NormalForm> as_normal_form(const Formula& f, NormalForm::Kind kind);

// Removes clauses that are supersets of another clause.
NormalForm absorb(NormalForm nf);

// Expands a monotone formula into its absorption-free DNF (prime implicants).
// Throws if f is not monotone or if the expansion exceeds clause_limit.
NormalForm minimize_monotone_dnf(const Formula& f, size_t clause_limit = size_t{1} << 16);

// Prime clauses of the dual kind (DNF <-> CNF) by distribution + absorption.
NormalForm dualize(const NormalForm& nf, size_t clause_limit = size_t{1} << 16);

struct PrimalGraph {
    std::set<VarId> nodes;
    std::set<std::pair<VarId, VarId>> edges;  // normalized u < v

    bool has_edge(const VarId& u, const VarId& v) const;
};

// One node per variable, one edge per co-occurring pair in some clause.
PrimalGraph primal_graph(const NormalForm& nf);

// ---------------------------------------------------------------------------
// Independent-or and disjoint declarations
// ---------------------------------------------------------------------------

// 1 - prod(1 - p_i): probability of a disjunction of independent events.
double ior(std::span<const double> ps);
double ior(std::initializer_list<double> ps);

// Disjoint-independent event taking value values[i] with probability probs[i].
struct DisjointDeclaration {
    std::vector<std::string> values;
    std::vector<double> probs;  // nonnegative, summing to 1
};

struct DisjointEncoding {
    std::vector<VarId> z_vars;    // k-1 independent chain variables
    ProbMap z_probs;
    std::vector<Formula> events;  // A_i, pairwise disjoint and exhaustive
};

// Chain encoding: A_1 = z1, A_2 = !z1 z2, ..., A_k = !z1 ... !z_{k-1} with
// P[z_i] = q_i / (1 - q_1 - ... - q_{i-1}) (0 by convention when the prefix
// already sums to 1).
DisjointEncoding encode_disjoint_declaration(const DisjointDeclaration& d);

}  // namespace dissoc
