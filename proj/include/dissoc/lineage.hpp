// Tuple-independent probabilistic databases: CSV loading, conjunctive queries
// without self-joins, lineage construction, the two chain-query plans with
// independent join/project, per-answer lower-bound views, and SQL emission.

#pragma once

#include <map>
#include <memory>
#include <optional>

#include "dissoc/formula.hpp"

namespace dissoc {

struct TupleRow {
    std::vector<std::string> values;
    VarId tuple_id;
    double prob = 1.0;
};

struct Relation {
    std::string name;
    std::string alias;  // short name used in queries/SQL; empty when unused
    std::vector<std::string> attributes;
    std::vector<TupleRow> rows;
    bool deterministic = false;
};

struct TupleDB {
    std::vector<Relation> relations;

    const Relation* find(const std::string& name_or_alias) const;
    ProbMap tuple_probs() const;
};

// Loads manifest.json ("relations": name, file, optional deterministic /
// var_prefix / alias) plus one CSV per relation. CSV: header row, last column
// "p" holding the tuple probability unless the relation is deterministic.
TupleDB load_db(const std::string& directory);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

struct Term {
    bool is_var = true;
    std::string text;  // variable name, or constant value
};

struct Atom {
    std::string relation;
    std::vector<Term> args;
};

struct Predicate {
    enum class Op { Le, Lt, Ge, Gt, Eq, Like };
    std::string variable;
    Op op = Op::Eq;
    std::string rhs;  // literal value or "$k" parameter
};

// Conjunctive query without self-joins, e.g.
//   Q(a) :- S(s,a), PS(s,u), P(u,n), s <= $1, n like $2
struct ConjQuery {
    std::string head_name;
    std::vector<std::string> head_vars;  // empty = Boolean query
    std::vector<Atom> atoms;
    std::vector<Predicate> predicates;
};

ConjQuery parse_query(std::string_view text);

using AnswerTuple = std::vector<std::string>;
using Params = std::map<std::string, std::string>;  // "$1" -> value

// ---------------------------------------------------------------------------
// Lineage
// ---------------------------------------------------------------------------

// Per-answer monotone DNF over probabilistic tuple ids; one clause per join
// witness, deterministic tuples omitted.
struct LineageMap {
    std::map<AnswerTuple, std::vector<std::vector<VarId>>> entries;

    Formula formula_for(const AnswerTuple& answer) const;
};

LineageMap lineage(const ConjQuery& q, const TupleDB& db, const Params& params = {});

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

// Operator tree over query variables: scans bind relation attributes to the
// atom's variables, joins are natural joins multiplying probabilities,
// projects eliminate duplicates with independent-or.
struct Plan;
using PlanPtr = std::shared_ptr<const Plan>;

struct Plan {
    enum class Kind { Scan, Join, Project };
    Kind kind = Kind::Scan;
    std::string relation;                // Scan
    PlanPtr left, right;                 // Join
    PlanPtr child;                       // Project
    std::vector<std::string> keep_vars;  // Project

    static PlanPtr scan(std::string relation);
    static PlanPtr join(PlanPtr l, PlanPtr r);
    static PlanPtr project(std::vector<std::string> keep, PlanPtr c);
};

// Relation contents already mapped to query variables; used to swap in the
// per-answer lower-bound views.
struct BoundView {
    std::vector<std::string> columns;
    std::vector<std::pair<std::vector<std::string>, double>> rows;
};

std::map<AnswerTuple, double> plan_eval(const PlanPtr& plan, const ConjQuery& q,
                                        const TupleDB& db, const Params& params = {},
                                        const std::map<std::string, BoundView>& views = {});

namespace detail {

// The 3-atom chain pattern A1(x,..), A2(x,y), A3(y,..): indices into q.atoms
// plus the two join variables. Throws on pattern mismatch.
struct ChainShape {
    int left = 0, middle = 0, right = 0;
    std::string x_var, y_var;  // A1-A2 and A2-A3 join variables
};
ChainShape resolve_chain(const ConjQuery& q);

}  // namespace detail

// The two plans for the 3-atom chain pattern A1(x,..), A2(x,y), A3(y,..):
// one dissociating the left end relation, one the right end.
struct ChainPlans {
    std::string left_relation, right_relation;  // dissociated by the respective plan
    PlanPtr upper_left, upper_right;
    PlanPtr lower_left, lower_right;  // same shape, carrying head vars past the view
};

ChainPlans chain_plans(const ConjQuery& q);

// Per-answer copy of the dissociated relation with probabilities replaced by
// 1 - (1-p)^(1/d), d = occurrences of the tuple in that answer's lineage.
// Columns are the atom's variables plus the head variables.
BoundView lower_bound_view(const TupleDB& db, const ConjQuery& q,
                           const std::string& dissociated_relation, const Params& params = {});

struct AnswerBound {
    AnswerTuple answer;
    double lower = 0.0, upper = 1.0;
    std::string method_lower, method_upper;  // name of the dissociated relation
    std::optional<double> exact;             // filled when the oracle is feasible
};

// Upper = min over both plans, lower = max over both view-based plans; ranked
// by upper bound descending, ties by answer ascending.
std::vector<AnswerBound> query_bounds(const ConjQuery& q, const TupleDB& db,
                                      const Params& params = {}, int oracle_var_limit = 24);

std::string answer_bounds_csv(const std::vector<AnswerBound>& bounds);

// ---------------------------------------------------------------------------
// SQL emission
// ---------------------------------------------------------------------------

enum class SqlVariant { UpperLeft, UpperRight, LowerLeft, LowerRight, Uda };

struct SqlEmission {
    std::string view;   // lower variants only
    std::string query;  // select statement, or the aggregate definition for Uda
};

// SQL for the chain plans against a standard DBMS with the IOR user-defined
// aggregate; lower variants pair the query with a view that rewrites the
// dissociated relation's probabilities.
SqlEmission emit_sql(const ConjQuery& q, const TupleDB& db, SqlVariant variant);

}  // namespace dissoc
