#include "dissoc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dissoc {

namespace {

double ior2(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// ex71: bounds as function of correlation
// ---------------------------------------------------------------------------

double rho_min(double q) {
    if (q <= 0.0 || q >= 1.0) return 0.0;  // degenerate events admit no spread
    double a = -q / (1.0 - q);
    double b = -(1.0 + q * q - 2.0 * q) / (q - q * q);
    return std::max(a, b);
}

std::vector<CorrelationPoint> ex71(double p, double q, const std::vector<double>& rho_grid) {
    std::vector<CorrelationPoint> rows;
    const double lo = rho_min(q);
    for (double rho : rho_grid) {
        if (rho < lo - 1e-12)
            throw std::invalid_argument("ex71: rho below the admissible minimum " +
                                        std::to_string(lo));
        double pab = rho * (q - q * q) + q * q;

        auto dnf = [&](double pp) { return 2 * pp * q - pp * pp * pab; };
        auto cnf = [&](double pp) {
            return 2 * pp * q + pp * pp * (1 - 2 * q) + (1 - pp) * (1 - pp) * pab;
        };

        CorrelationPoint d;
        d.cnf = false;
        d.p = p;
        d.q = q;
        d.rho = rho;
        d.p_ab = pab;
        d.exact = 2 * p * q - p * pab;
        d.upper = dnf(p);                          // disjunctive upper: copies keep p
        d.lower = dnf(1.0 - std::sqrt(1.0 - p));   // optimal symmetric lower
        rows.push_back(d);

        CorrelationPoint c;
        c.cnf = true;
        c.p = p;
        c.q = q;
        c.rho = rho;
        c.p_ab = pab;
        c.exact = p + (1 - p) * pab;
        c.upper = cnf(std::sqrt(p));  // optimal symmetric upper
        c.lower = cnf(p);             // conjunctive lower: copies keep p
        rows.push_back(c);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// ex72 / ex73: grid studies
// ---------------------------------------------------------------------------

namespace {

// phi = x1y1 v x2y1 v x2y2, Shannon expansion on y1
double p4_exact(double p1, double p2, double q1, double q2) {
    return ior2(p1, p2) * q1 + (1.0 - q1) * p2 * q2;
}

// phi'1 = (x1 v x2,1')y1 v x2,2'y2 with copies (a, b) of x2
double p4_diss_x(double p1, double a, double b, double q1, double q2) {
    return ior2(ior2(p1, a) * q1, b * q2);
}

// phi'2 = x1 y1,1' v x2(y1,2' v y2) with copies (a, b) of y1
double p4_diss_y(double p1, double p2, double a, double b, double q2) {
    return ior2(p1 * a, p2 * ior2(b, q2));
}

double rel_err(double delta, double exact) {
    if (exact == 0.0) return 0.0;  // every bound is provably 0 there
    return delta / exact;
}

const double kGrid[11] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

GridSummary summarize(const std::string& method, const std::vector<double>& errs) {
    GridSummary s;
    s.method = method;
    s.points = static_cast<int>(errs.size());
    double sum = 0, worst = 0;
    for (double e : errs) {
        sum += e;
        worst = std::max(worst, e);
    }
    s.avg_rel_err_pct = 100.0 * sum / errs.size();
    s.worst_rel_err_pct = 100.0 * worst;
    return s;
}

}  // namespace

Ex72Result ex72_grid() {
    Ex72Result result;
    std::vector<double> du_err, dl_err, mu_err, ml_err;
    du_err.reserve(14641);
    for (double p1 : kGrid)
        for (double p2 : kGrid)
            for (double q1 : kGrid)
                for (double q2 : kGrid) {
                    double exact = p4_exact(p1, p2, q1, q2);

                    // read-once lowest upper bounds / greatest lower bounds
                    double u1 = ior2(p1 * q1, p2);                 // x1y1 v x2
                    double u2 = ior2(q1, p2 * q2);                 // y1 v x2y2
                    double u3 = ior2(ior2(p1, p2) * q1, q2);       // (x1 v x2)y1 v y2
                    double u4 = ior2(p1, p2 * ior2(q1, q2));       // x1 v x2(y1 v y2)
                    double model_upper = std::min(std::min(u1, u2), std::min(u3, u4));
                    double l1 = ior2(p1, p2) * q1;                 // (x1 v x2)y1
                    double l2 = p2 * ior2(q1, q2);                 // x2(y1 v y2)
                    double l3 = ior2(p1 * q1, p2 * q2);            // x1y1 v x2y2
                    double model_lower = std::max(std::max(l1, l2), l3);

                    // dissociation uppers: original probabilities on the copies
                    double diss_upper = std::min(p4_diss_x(p1, p2, p2, q1, q2),
                                                 p4_diss_y(p1, p2, q1, q1, q2));
                    // three optimal lower assignments per dissociation
                    double sp = 1.0 - std::sqrt(1.0 - p2);
                    double sq = 1.0 - std::sqrt(1.0 - q1);
                    double diss_lower = std::max({p4_diss_x(p1, p2, 0.0, q1, q2),
                                                  p4_diss_x(p1, sp, sp, q1, q2),
                                                  p4_diss_x(p1, 0.0, p2, q1, q2),
                                                  p4_diss_y(p1, p2, q1, 0.0, q2),
                                                  p4_diss_y(p1, p2, sq, sq, q2),
                                                  p4_diss_y(p1, p2, 0.0, q1, q2)});

                    GridPoint pt{p1, p2, q1, q2, exact, diss_upper, diss_lower,
                                 model_upper, model_lower};
                    result.points.push_back(pt);
                    du_err.push_back(rel_err(diss_upper - exact, exact));
                    mu_err.push_back(rel_err(model_upper - exact, exact));
                    dl_err.push_back(rel_err(exact - diss_lower, exact));
                    ml_err.push_back(rel_err(exact - model_lower, exact));
                }
    result.summaries = {summarize("dissociation_upper", du_err),
                        summarize("model_upper", mu_err),
                        summarize("dissociation_lower", dl_err),
                        summarize("model_lower", ml_err)};
    return result;
}

namespace {

// psi'1 = (x1 v a)(y1 v b)(y1 v y2) with copies (a, b) of x2
double p4c_diss_x(double p1, double a, double b, double q1, double q2) {
    return ior2(p1, a) * (q1 + (1.0 - q1) * b * q2);
}

// psi'2 = (x1 v x2)(a v x2)(b v y2) with copies (a, b) of y1
double p4c_diss_y(double p1, double p2, double a, double b, double q2) {
    return ior2(b, q2) * (p2 + (1.0 - p2) * p1 * a);
}

// psi = (x1 v x2)(y1 v x2)(y1 v y2) exactly, by Shannon expansion on x2
double p4c_exact(double p1, double p2, double q1, double q2) {
    return p2 * ior2(q1, q2) + (1.0 - p2) * p1 * q1;
}

}  // namespace

Ex73Result ex73_grid() {
    Ex73Result result;
    std::vector<double> cu_err, cl_err;
    cu_err.reserve(14641);
    for (double p1 : kGrid)
        for (double p2 : kGrid)
            for (double q1 : kGrid)
                for (double q2 : kGrid) {
                    double exact = p4_exact(p1, p2, q1, q2);
                    // the CNF and DNF expressions denote the same function
                    double psi = p4c_exact(p1, p2, q1, q2);
                    result.max_exact_mismatch =
                        std::max(result.max_exact_mismatch, std::abs(psi - exact));

                    double rp = std::sqrt(p2), rq = std::sqrt(q1);
                    double upper = std::min({p4c_diss_x(p1, p2, 1.0, q1, q2),
                                             p4c_diss_x(p1, rp, rp, q1, q2),
                                             p4c_diss_x(p1, 1.0, p2, q1, q2),
                                             p4c_diss_y(p1, p2, q1, 1.0, q2),
                                             p4c_diss_y(p1, p2, rq, rq, q2),
                                             p4c_diss_y(p1, p2, 1.0, q1, q2)});
                    double lower = std::max(p4c_diss_x(p1, p2, p2, q1, q2),
                                            p4c_diss_y(p1, p2, q1, q1, q2));
                    cu_err.push_back(rel_err(upper - exact, exact));
                    cl_err.push_back(rel_err(exact - lower, exact));
                }
    result.summaries = {summarize("conjunctive_upper", cu_err),
                        summarize("conjunctive_lower", cl_err)};
    return result;
}

// ---------------------------------------------------------------------------
// ex74: path series
// ---------------------------------------------------------------------------

double ex74_exact(double p, int n) {
    if (n < 1) throw std::invalid_argument("ex74: n must be >= 1");
    double pb = 1.0 - p;
    if (n == 1) return p * p;
    if (n == 2) return 3 * p * p - 2 * p * p * p;
    const double A = pb * (1.0 + p);
    const double B = -(p * p) * pb * pb;
    const double C = p * p * (p * pb * pb + (2.0 - p) * (1.0 - p * pb));
    double prev = p * p;
    double cur = 3 * p * p - 2 * p * p * p;
    for (int i = 3; i <= n; ++i) {
        double next = A * cur + B * prev + C;
        prev = cur;
        cur = next;
    }
    return cur;
}

double ex74_bound(double p, int n, bool upper) {
    if (n < 1) throw std::invalid_argument("ex74: n must be >= 1");
    if (n == 1) return p * p;  // single clause, nothing dissociated
    double pp = upper ? p : 1.0 - std::sqrt(1.0 - p);
    double pb = 1.0 - p, ppb = 1.0 - pp;
    return 1.0 - (1.0 - p * pp) * std::pow(1.0 - p * (1.0 - ppb * ppb), n - 2) *
                     (1.0 - p * (1.0 - pb * ppb));
}

std::vector<SeriesRow> ex74(double p, int n_max) {
    std::vector<SeriesRow> rows;
    for (int n = 1; n <= n_max; ++n) {
        SeriesRow r;
        r.n = n;
        r.p = p;
        r.exact = ex74_exact(p, n);
        r.upper = ex74_bound(p, n, true);
        r.lower = ex74_bound(p, n, false);
        rows.push_back(r);
    }
    return rows;
}

std::vector<SeriesRow> ex74_target(double r, const std::vector<int>& ns) {
    if (r <= 0.0 || r >= 1.0) throw std::invalid_argument("ex74_target: r must be in (0,1)");
    std::vector<SeriesRow> rows;
    for (int n : ns) {
        double lo = 0.0, hi = 1.0;
        int iter = 0;
        while (hi - lo > 0.0 && iter < 200) {
            double mid = 0.5 * (lo + hi);
            double v = ex74_exact(mid, n);
            if (std::abs(v - r) <= 1e-12) {
                lo = hi = mid;
                break;
            }
            (v < r ? lo : hi) = mid;
            ++iter;
        }
        if (std::abs(ex74_exact(0.5 * (lo + hi), n) - r) > 1e-9)
            throw std::runtime_error("ex74_target: bisection did not converge for n = " +
                                     std::to_string(n));
        SeriesRow row;
        row.n = n;
        row.p = 0.5 * (lo + hi);
        row.exact = ex74_exact(row.p, n);
        row.upper = ex74_bound(row.p, n, true);
        row.lower = ex74_bound(row.p, n, false);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// ex75: complete bipartite series
// ---------------------------------------------------------------------------

double ex75_limit(double r) {
    double s = std::sqrt(r);
    return 1.0 - std::pow(1.0 - s, s);
}

std::vector<SeriesRow> ex75(double r, const std::vector<int>& ns) {
    if (r <= 0.0 || r >= 1.0) throw std::invalid_argument("ex75: r must be in (0,1)");
    std::vector<SeriesRow> rows;
    double limit = ex75_limit(r);
    for (int n : ns) {
        SeriesRow row;
        row.n = n;
        row.p = 1.0 - std::pow(1.0 - std::sqrt(r), 1.0 / n);
        double p = row.p;
        row.exact = std::pow(1.0 - std::pow(1.0 - p, n), 2.0);
        auto value = [&](double pp) {
            return 1.0 - std::pow(1.0 - p * (1.0 - std::pow(1.0 - pp, n)), n);
        };
        row.upper = value(p);
        row.lower = value(1.0 - std::pow(1.0 - p, 1.0 / n));
        row.limit = limit;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Formula families
// ---------------------------------------------------------------------------

namespace {

VarId xvar(int i) { return VarId("x" + std::to_string(i)); }
VarId yvar(int j) { return VarId("y" + std::to_string(j)); }

Formula clause2(const VarId& a, const VarId& b) {
    return Formula::conj({Formula::lit(a), Formula::lit(b)});
}

}  // namespace

Formula path_dnf(int n) {
    if (n < 1) throw std::invalid_argument("path_dnf: n must be >= 1");
    std::vector<Formula> clauses;
    clauses.push_back(clause2(xvar(1), yvar(1)));
    for (int j = 2; j <= n; ++j) {
        clauses.push_back(clause2(xvar(j - 1), yvar(j)));
        clauses.push_back(clause2(xvar(j), yvar(j)));
    }
    return clauses.size() == 1 ? clauses.front() : Formula::disj(std::move(clauses));
}

Formula bipartite_dnf(int n) {
    if (n < 1) throw std::invalid_argument("bipartite_dnf: n must be >= 1");
    std::vector<Formula> clauses;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) clauses.push_back(clause2(xvar(i), yvar(j)));
    return clauses.size() == 1 ? clauses.front() : Formula::disj(std::move(clauses));
}

Formula gen_pp2cnf(const std::vector<std::pair<int, int>>& edges) {
    if (edges.empty()) return Formula::constant(true);
    std::vector<Formula> clauses;
    for (const auto& [i, j] : edges)
        clauses.push_back(Formula::disj({Formula::lit(xvar(i)), Formula::lit(yvar(j))}));
    return clauses.size() == 1 ? clauses.front() : Formula::conj(std::move(clauses));
}

// ---------------------------------------------------------------------------
// Seeded generation
// ---------------------------------------------------------------------------

uint64_t Rng::next() {
    // xorshift64*: platform-independent, good enough for test corpora
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
}

uint64_t Rng::below(uint64_t bound) { return bound ? next() % bound : 0; }

double Rng::unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

Formula random_monotone_formula(uint64_t seed, int var_budget, int clause_budget,
                                NormalForm::Kind kind) {
    if (var_budget < 1 || clause_budget < 1)
        throw std::invalid_argument("random_monotone_formula: budgets must be >= 1");
    Rng rng(seed);
    int nvars = 1 + static_cast<int>(rng.below(var_budget));
    int nclauses = 1 + static_cast<int>(rng.below(clause_budget));
    NormalForm nf;
    nf.kind = kind;
    for (int c = 0; c < nclauses; ++c) {
        std::vector<VarId> clause;
        for (int v = 1; v <= nvars; ++v)
            if (rng.below(2)) clause.push_back(xvar(v));
        if (clause.empty()) clause.push_back(xvar(1 + static_cast<int>(rng.below(nvars))));
        nf.clauses.push_back(std::move(clause));
    }
    nf = absorb(std::move(nf));
    return to_formula(nf);
}

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

std::string ex71_csv(const std::vector<CorrelationPoint>& rows) {
    std::ostringstream os;
    os << "variant,p,q,rho,pab,exact,upper,lower\n";
    for (const auto& r : rows)
        os << (r.cnf ? "cnf" : "dnf") << ',' << fmt(r.p) << ',' << fmt(r.q) << ',' << fmt(r.rho)
           << ',' << fmt(r.p_ab) << ',' << fmt(r.exact) << ',' << fmt(r.upper) << ','
           << fmt(r.lower) << "\n";
    return os.str();
}

std::string ex72_points_csv(const std::vector<GridPoint>& rows) {
    std::ostringstream os;
    os << "p1,p2,q1,q2,exact,diss_upper,diss_lower,model_upper,model_lower\n";
    for (const auto& r : rows)
        os << fmt(r.p1) << ',' << fmt(r.p2) << ',' << fmt(r.q1) << ',' << fmt(r.q2) << ','
           << fmt(r.exact) << ',' << fmt(r.diss_upper) << ',' << fmt(r.diss_lower) << ','
           << fmt(r.model_upper) << ',' << fmt(r.model_lower) << "\n";
    return os.str();
}

std::string grid_summary_csv(const std::vector<GridSummary>& rows) {
    std::ostringstream os;
    os << "method,avg_rel_err_pct,worst_rel_err_pct,points\n";
    for (const auto& r : rows)
        os << r.method << ',' << fmt(r.avg_rel_err_pct) << ',' << fmt(r.worst_rel_err_pct) << ','
           << r.points << "\n";
    return os.str();
}

std::string series_csv(const std::vector<SeriesRow>& rows, bool with_limit) {
    std::ostringstream os;
    os << (with_limit ? "n,p,exact,upper,lower,limit\n" : "n,p,exact,upper,lower\n");
    for (const auto& r : rows) {
        os << r.n << ',' << fmt(r.p) << ',' << fmt(r.exact) << ',' << fmt(r.upper) << ','
           << fmt(r.lower);
        if (with_limit) os << ',' << fmt(r.limit);
        os << "\n";
    }
    return os.str();
}

}  // namespace dissoc
