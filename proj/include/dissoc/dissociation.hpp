// Dissociation of Boolean expressions: constructing dissociations, classifying
// them as conjunctive/disjunctive, cover and degeneracy checks, oblivious /
// compensation / model-degenerate probability assignments, and end-to-end
// bound computation through read-once factorization.

#pragma once

#include <optional>

#include "dissoc/exact.hpp"
#include "dissoc/formula.hpp"

namespace dissoc {

// Occurrence positions of a variable, numbered 0..k-1 in depth-first order.
// A partition assigns each occurrence to the fresh variable of its cell.
using OccurrencePartition = std::vector<std::vector<int>>;

// Substitution theta from fresh variables back to originals, together with
// the occurrence partition that produced the dissociated expression.
struct DissociationSpec {
    struct Entry {
        VarId original;
        std::vector<VarId> fresh;   // one per cell, cell index = copy index
        OccurrencePartition cells;  // disjoint, non-empty, covering all occurrences
    };
    std::vector<Entry> entries;  // sorted by original

    bool unary() const { return entries.size() == 1; }
    std::map<VarId, VarId> theta() const;
};

// Replaces the occurrences of x selected by each partition cell with a fresh
// variable per cell. The partition must cover all occurrences of x; f must be
// monotone (positive) in x.
std::pair<Formula, DissociationSpec> dissociate(const Formula& f, const VarId& x,
                                                const OccurrencePartition& partition);

// Gives every occurrence of every variable in xs its own fresh variable.
std::pair<Formula, DissociationSpec> eager_dissociate(const Formula& f,
                                                      const std::set<VarId>& xs);

struct DissociationKind {
    enum class Shape { Conjunctive, Disjunctive, Neither };
    Shape shape = Shape::Neither;
    std::vector<Formula> factors;     // f_j per copy when shape is not Neither
    bool semantically_verified = false;
};

// Detects whether the fresh variables are conjunctive or disjunctive in f'
// (each copy confined to one factor of the top-level connective). Requires a
// unary spec. The syntactic decomposition is verified semantically when the
// total variable count is at most verify_var_limit.
DissociationKind classify(const Formula& fprime, const DissociationSpec& spec,
                          int verify_var_limit = 16);

// True iff some valuation of the non-dissociated variables reduces f' to
// exactly the conjunction (disjunction) of the copies in s.
bool covers(const Formula& fprime, const DissociationSpec& spec, const std::set<int>& s,
            int y_limit = 20);

// Covers all singletons and the complete copy set; on such dissociations the
// bound conditions are necessary as well as sufficient.
bool is_non_degenerate(const Formula& fprime, const DissociationSpec& spec, int y_limit = 20);

enum class Direction { Upper, Lower };

struct BoundAssignment {
    enum class Style { OptimalSymmetric, OptimalWeighted, Compensation, ModelDegenerate };

    Direction direction = Direction::Upper;
    Style style = Style::OptimalSymmetric;
    std::vector<double> copy_probs;

    // Stored-data invariant from the bound conditions, with slack 1e-12:
    // conjunctive upper: prod p'_j >= p; conjunctive lower: all p'_j <= p;
    // disjunctive upper: all p'_j >= p; disjunctive lower: prod(1-p'_j) >= 1-p.
    bool satisfies(DissociationKind::Shape shape, double p, double slack = 1e-12) const;
};

// Optimal oblivious assignment for d copies of a variable with probability p.
// Symmetric by default; weights (positive, summing to 1) select another point
// on the optimal frontier where one exists.
BoundAssignment oblivious_assignment(DissociationKind::Shape shape, Direction direction,
                                     double p, int d,
                                     const std::optional<std::vector<double>>& weights =
                                         std::nullopt);

// Relaxation & compensation probabilities (p, P[x|f1]) for f = f1 and f2, or
// (p, P[x|!f1]) for f = f1 or f2. Exact when x is the only shared variable.
std::pair<double, double> compensation_assignment(const Formula& f1, const Formula& f2,
                                                  const VarId& x, bool conjunctive,
                                                  const ProbMap& p);

// Degenerate 0/1 assignments realizing model-based bounds: (p,1,...,1) for
// upper, (p,0,...,0) for lower.
BoundAssignment model_degenerate_assignment(DissociationKind::Shape shape, Direction direction,
                                            double p, int d);

// Checks the oblivious bound property valuation by valuation (equivalent to
// quantifying over all probabilities of the non-dissociated variables):
// P[f'[nu]] >= P[f[nu]] for Upper, <= for Lower, for every nu over y.
bool verify_oblivious_bound(const Formula& f, const Formula& fprime,
                            const DissociationSpec& spec, double p,
                            const BoundAssignment& assignment, int y_limit = 16);

// End-to-end bound: eagerly dissociates xs, factorizes the result read-once,
// assigns optimal symmetric probabilities per copy count and evaluates.
struct BoundReport {
    struct VarLine {
        VarId original;
        int occurrences = 0;
        int copies = 0;
        std::vector<double> copy_probs;
    };

    Direction direction = Direction::Upper;
    double bound = 0.0;
    bool disjunctive = false;  // DNF clause shape; conjunctive otherwise
    bool sufficient_condition_only = false;  // multi-variable dissociation
    std::vector<VarLine> lines;
    ReadOnceTree tree;

    std::string render_text() const;
    std::string render_csv() const;  // variable,occurrences,copies,assignment,bound
};

struct NotReadOnceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

BoundReport bound_pipeline(const Formula& f, const ProbMap& p, const std::set<VarId>& xs,
                           Direction direction);

}  // namespace dissoc
