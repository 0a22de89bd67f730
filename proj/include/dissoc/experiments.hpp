// Desk-scale reproductions of the quantitative studies: bound quality as a
// function of correlation, dissociation versus model-based bounds on an
// 11^4 probability grid, the conjunctive/disjunctive asymmetry, and the
// path/complete-bipartite growth series.

#pragma once

#include <cstdint>

#include "dissoc/formula.hpp"

namespace dissoc {

// ---------------------------------------------------------------------------
// Correlation study (xA v xB and its CNF twin, dissociated on x)
// ---------------------------------------------------------------------------

struct CorrelationPoint {
    bool cnf = false;  // variant: CNF (x v A)(x v B) or DNF xA v xB
    double p = 0, q = 0, rho = 0;
    double p_ab = 0;  // P[AB] = rho (q - q^2) + q^2
    double exact = 0, upper = 0, lower = 0;
};

// Smallest admissible correlation for P[A]=P[B]=q.
double rho_min(double q);

// Evaluates the closed forms for both variants on the given rho grid with
// symmetric optimal assignments. Throws if a rho is below rho_min(q).
std::vector<CorrelationPoint> ex71(double p, double q, const std::vector<double>& rho_grid);

// ---------------------------------------------------------------------------
// Grid studies (the P4 lineage x1y1 v x2y1 v x2y2 over all 11^4 assignments)
// ---------------------------------------------------------------------------

struct GridSummary {
    std::string method;
    double avg_rel_err_pct = 0;    // mean over all points, 0/0 counted as 0
    double worst_rel_err_pct = 0;  // max over all points
    int points = 0;
};

struct GridPoint {
    double p1, p2, q1, q2;
    double exact;
    double diss_upper, diss_lower;
    double model_upper, model_lower;
};

struct Ex72Result {
    std::vector<GridPoint> points;                // grid order: p1, p2, q1, q2 innermost
    std::vector<GridSummary> summaries;           // diss/model x upper/lower
};

// Best-of dissociation bounds (2 uppers, 6 lowers) against best-of read-once
// model bounds (4 LUBs, 3 GLBs) on the 14641-point grid.
Ex72Result ex72_grid();

struct Ex73Result {
    std::vector<GridSummary> summaries;  // conjunctive upper/lower
    double max_exact_mismatch = 0;       // |P_psi - P_phi| over the grid
};

// Conjunctive dissociations of the CNF form of the same function:
// 6 optimal uppers, 2 optimal lowers.
Ex73Result ex73_grid();

// ---------------------------------------------------------------------------
// Growth series
// ---------------------------------------------------------------------------

struct SeriesRow {
    int n = 0;
    double p = 0;
    double exact = 0, upper = 0, lower = 0;
    double limit = 0;  // ex75 only
};

// Path-shaped DNF x1y1 v x1y2 v x2y2 v ... v xn yn, all variables at
// probability p; exact by the second-order recurrence, bounds by the closed
// dissociation form.
double ex74_exact(double p, int n);
double ex74_bound(double p, int n, bool upper);
std::vector<SeriesRow> ex74(double p, int n_max);

// Target mode: bisects p so that the exact probability equals r at each n.
std::vector<SeriesRow> ex74_target(double r, const std::vector<int>& ns);

// Complete bipartite DNF over [n]^2 with p chosen so the exact probability
// is r; reports the limit 1 - (1 - sqrt(r))^sqrt(r) of the upper bound.
double ex75_limit(double r);
std::vector<SeriesRow> ex75(double r, const std::vector<int>& ns);

// The path DNF of ex74 as a formula (x1..xn, y1..yn), for oracle validation.
Formula path_dnf(int n);

// Complete bipartite DNF of ex75 over x1..xn, y1..yn.
Formula bipartite_dnf(int n);

// PP2CNF over an edge set: AND of (x_i v y_j).
Formula gen_pp2cnf(const std::vector<std::pair<int, int>>& edges);

// ---------------------------------------------------------------------------
// Seeded generators for property tests
// ---------------------------------------------------------------------------

// Reproducible monotone DNF/CNF over at most var_budget variables with at
// most clause_budget clauses; identical output for identical seeds.
Formula random_monotone_formula(uint64_t seed, int var_budget, int clause_budget,
                                NormalForm::Kind kind);

// Deterministic xorshift generator used by the test corpus.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    uint64_t next();
    // uniform in [0, bound)
    uint64_t below(uint64_t bound);
    // uniform double in [0, 1]
    double unit();

private:
    uint64_t state_;
};

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

std::string ex71_csv(const std::vector<CorrelationPoint>& rows);
std::string ex72_points_csv(const std::vector<GridPoint>& rows);
std::string grid_summary_csv(const std::vector<GridSummary>& rows);
std::string series_csv(const std::vector<SeriesRow>& rows, bool with_limit);

}  // namespace dissoc
