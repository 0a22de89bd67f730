#include "dissoc/dissociation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace dissoc {

std::map<VarId, VarId> DissociationSpec::theta() const {
    std::map<VarId, VarId> out;
    for (const auto& e : entries)
        for (const auto& fresh : e.fresh) out.emplace(fresh, e.original);
    return out;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {

VarId fresh_name(const VarId& original, int copy_index, const std::set<VarId>& taken) {
    std::string tick = "'";
    while (true) {
        VarId candidate(original.name() + tick + std::to_string(copy_index + 1));
        if (!taken.count(candidate)) return candidate;
        tick += "'";
    }
}

Formula replace_occurrences(const Formula& f, const VarId& x,
                            const std::vector<VarId>& occurrence_target, int& next) {
    switch (f.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return f;
        case Formula::Kind::Lit:
            if (f.var() == x) return Formula::lit(occurrence_target[next++], f.positive());
            return f;
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<Formula> kids;
            kids.reserve(f.children().size());
            for (const auto& c : f.children())
                kids.push_back(replace_occurrences(c, x, occurrence_target, next));
            return f.kind() == Formula::Kind::And ? Formula::conj(std::move(kids))
                                                  : Formula::disj(std::move(kids));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

std::pair<Formula, DissociationSpec> dissociate(const Formula& f, const VarId& x,
                                                const OccurrencePartition& partition) {
    const int k = count_occurrences(f, x);
    if (k == 0) throw std::invalid_argument("dissociate: variable " + x.name() + " absent");
    if (!is_monotone_in(f, x))
        throw std::invalid_argument("dissociate: formula is not monotone in " + x.name());

    std::vector<int> cell_of(k, -1);
    for (size_t j = 0; j < partition.size(); ++j) {
        if (partition[j].empty())
            throw std::invalid_argument("dissociate: empty partition cell");
        for (int occ : partition[j]) {
            if (occ < 0 || occ >= k || cell_of[occ] != -1)
                throw std::invalid_argument("dissociate: partition does not cover occurrences");
            cell_of[occ] = static_cast<int>(j);
        }
    }
    for (int occ = 0; occ < k; ++occ)
        if (cell_of[occ] == -1)
            throw std::invalid_argument("dissociate: partition does not cover occurrences");

    std::set<VarId> taken = vars(f);
    DissociationSpec::Entry entry;
    entry.original = x;
    entry.cells = partition;
    for (size_t j = 0; j < partition.size(); ++j) {
        VarId fresh = fresh_name(x, static_cast<int>(j), taken);
        taken.insert(fresh);
        entry.fresh.push_back(fresh);
    }

    std::vector<VarId> occurrence_target(k);
    for (int occ = 0; occ < k; ++occ) occurrence_target[occ] = entry.fresh[cell_of[occ]];
    int next = 0;
    Formula fprime = replace_occurrences(f, x, occurrence_target, next);

    DissociationSpec spec;
    spec.entries.push_back(std::move(entry));
    return {std::move(fprime), std::move(spec)};
}

std::pair<Formula, DissociationSpec> eager_dissociate(const Formula& f,
                                                      const std::set<VarId>& xs) {
    Formula current = f;
    DissociationSpec combined;
    for (const auto& x : xs) {  // set order: deterministic
        int k = count_occurrences(current, x);
        if (k == 0) throw std::invalid_argument("eager_dissociate: variable " + x.name() + " absent");
        OccurrencePartition singletons(k);
        for (int i = 0; i < k; ++i) singletons[i] = {i};
        auto [next, spec] = dissociate(current, x, singletons);
        current = std::move(next);
        combined.entries.push_back(std::move(spec.entries.front()));
    }
    return {std::move(current), std::move(combined)};
}

// ---------------------------------------------------------------------------
// Classification, covers, degeneracy
// ---------------------------------------------------------------------------

namespace {

// Distinct fresh variables occurring in f, as copy indices.
std::set<int> fresh_indices_in(const Formula& f, const std::map<VarId, int>& copy_index) {
    std::set<int> out;
    for (const auto& v : vars(f)) {
        auto it = copy_index.find(v);
        if (it != copy_index.end()) out.insert(it->second);
    }
    return out;
}

}  // namespace

DissociationKind classify(const Formula& fprime, const DissociationSpec& spec,
                          int verify_var_limit) {
    if (!spec.unary())
        throw std::invalid_argument("classify: requires a unary dissociation spec");
    const auto& fresh = spec.entries.front().fresh;
    const int d = static_cast<int>(fresh.size());
    std::map<VarId, int> copy_index;
    for (int j = 0; j < d; ++j) copy_index[fresh[j]] = j;

    DissociationKind result;
    if (d == 1) {
        result.shape = DissociationKind::Shape::Conjunctive;
        result.factors = {fprime};
        result.semantically_verified = true;
        return result;
    }

    Formula::Kind root = fprime.kind();
    if (root != Formula::Kind::And && root != Formula::Kind::Or) return result;  // Neither

    // Group top-level children by the single copy they mention; children with
    // no copy join the first factor. Any child mentioning two copies breaks
    // the decomposition.
    std::vector<std::vector<Formula>> groups(d);
    for (const auto& child : fprime.children()) {
        std::set<int> mentioned = fresh_indices_in(child, copy_index);
        if (mentioned.size() > 1) return result;  // Neither
        int slot = mentioned.empty() ? 0 : *mentioned.begin();
        groups[slot].push_back(child);
    }
    for (const auto& g : groups)
        if (g.empty()) return result;  // some copy vanished: not a d-factor split

    std::vector<Formula> factors;
    factors.reserve(d);
    for (auto& g : groups)
        factors.push_back(g.size() == 1 ? g.front()
                          : root == Formula::Kind::And ? Formula::conj(std::move(g))
                                                       : Formula::disj(std::move(g)));

    Formula regrouped = root == Formula::Kind::And ? Formula::conj(factors)
                                                   : Formula::disj(factors);
    bool verified = false;
    if (static_cast<int>(vars(fprime).size()) <= verify_var_limit) {
        if (!semantically_equal(fprime, regrouped, verify_var_limit)) return result;
        verified = true;
    }

    result.shape = root == Formula::Kind::And ? DissociationKind::Shape::Conjunctive
                                              : DissociationKind::Shape::Disjunctive;
    result.factors = std::move(factors);
    result.semantically_verified = verified;
    return result;
}

bool covers(const Formula& fprime, const DissociationSpec& spec, const std::set<int>& s,
            int y_limit) {
    DissociationKind kind = classify(fprime, spec);
    if (kind.shape == DissociationKind::Shape::Neither)
        throw std::invalid_argument("covers: dissociation is neither conjunctive nor disjunctive");
    bool conjunctive = kind.shape == DissociationKind::Shape::Conjunctive;

    const auto& fresh = spec.entries.front().fresh;
    for (int j : s)
        if (j < 0 || j >= static_cast<int>(fresh.size()))
            throw std::invalid_argument("covers: copy index out of range");

    Formula target = Formula::constant(conjunctive);
    if (!s.empty()) {
        std::vector<Formula> lits;
        for (int j : s) lits.push_back(Formula::lit(fresh[j]));
        target = lits.size() == 1 ? lits.front()
                 : conjunctive    ? Formula::conj(std::move(lits))
                                  : Formula::disj(std::move(lits));
    }

    std::set<VarId> fresh_set(fresh.begin(), fresh.end());
    std::vector<VarId> ys;
    for (const auto& v : vars(fprime))
        if (!fresh_set.count(v)) ys.push_back(v);
    if (static_cast<int>(ys.size()) > y_limit)
        throw std::invalid_argument("covers: too many non-dissociated variables");

    Valuation nu;
    for (uint64_t m = 0; m < (uint64_t{1} << ys.size()); ++m) {
        for (size_t i = 0; i < ys.size(); ++i) nu[ys[i]] = (m >> i) & 1u;
        if (semantically_equal(restrict(fprime, nu), target)) return true;
    }
    return false;
}

bool is_non_degenerate(const Formula& fprime, const DissociationSpec& spec, int y_limit) {
    const int d = static_cast<int>(spec.entries.front().fresh.size());
    std::set<int> full;
    for (int j = 0; j < d; ++j) {
        if (!covers(fprime, spec, {j}, y_limit)) return false;
        full.insert(j);
    }
    return covers(fprime, spec, full, y_limit);
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

bool BoundAssignment::satisfies(DissociationKind::Shape shape, double p, double slack) const {
    bool conj = shape == DissociationKind::Shape::Conjunctive;
    if (direction == Direction::Upper) {
        if (conj) {
            double prod = 1.0;
            for (double q : copy_probs) prod *= q;
            return prod >= p - slack;
        }
        return std::all_of(copy_probs.begin(), copy_probs.end(),
                           [&](double q) { return q >= p - slack; });
    }
    if (conj)
        return std::all_of(copy_probs.begin(), copy_probs.end(),
                           [&](double q) { return q <= p + slack; });
    double miss = 1.0;
    for (double q : copy_probs) miss *= 1.0 - q;
    return miss >= (1.0 - p) - slack;
}

BoundAssignment oblivious_assignment(DissociationKind::Shape shape, Direction direction,
                                     double p, int d,
                                     const std::optional<std::vector<double>>& weights) {
    if (shape == DissociationKind::Shape::Neither)
        throw std::invalid_argument(
            "oblivious_assignment: no bound conditions for a Neither-kind dissociation");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("oblivious_assignment: p outside [0,1]");
    if (d < 1) throw std::invalid_argument("oblivious_assignment: copy count must be positive");

    bool conj = shape == DissociationKind::Shape::Conjunctive;
    bool frontier = (conj && direction == Direction::Upper) ||
                    (!conj && direction == Direction::Lower);
    if (weights) {
        if (!frontier)
            throw std::invalid_argument(
                "oblivious_assignment: weights apply only where the optimal frontier is a family");
        if (static_cast<int>(weights->size()) != d)
            throw std::invalid_argument("oblivious_assignment: weight count != copy count");
        double sum = 0.0;
        for (double w : *weights) {
            if (w <= 0.0) throw std::invalid_argument("oblivious_assignment: weights must be positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("oblivious_assignment: weights must sum to 1");
    }

    BoundAssignment out;
    out.direction = direction;
    out.style = weights ? BoundAssignment::Style::OptimalWeighted
                        : BoundAssignment::Style::OptimalSymmetric;
    out.copy_probs.resize(d);
    for (int j = 0; j < d; ++j) {
        double w = weights ? (*weights)[j] : 1.0 / d;
        if (!frontier) {
            out.copy_probs[j] = p;  // unique optimum
        } else if (conj) {
            out.copy_probs[j] = std::pow(p, w);
        } else {
            out.copy_probs[j] = 1.0 - std::pow(1.0 - p, w);
        }
    }
    return out;
}

std::pair<double, double> compensation_assignment(const Formula& f1, const Formula& f2,
                                                  const VarId& x, bool conjunctive,
                                                  const ProbMap& p) {
    if (!vars(f1).count(x) || !vars(f2).count(x))
        throw std::invalid_argument("compensation_assignment: x must occur in both formulas");
    auto it = p.find(x);
    if (it == p.end())
        throw std::invalid_argument("compensation_assignment: no probability for " + x.name());
    double p2 = conjunctive ? conditional_prob(x, f1, p)
                            : conditional_prob(x, complement(f1), p);
    return {it->second, p2};
}

BoundAssignment model_degenerate_assignment(DissociationKind::Shape shape, Direction direction,
                                            double p, int d) {
    if (shape == DissociationKind::Shape::Neither)
        throw std::invalid_argument("model_degenerate_assignment: Neither-kind dissociation");
    if (d < 1) throw std::invalid_argument("model_degenerate_assignment: d must be positive");
    BoundAssignment out;
    out.direction = direction;
    out.style = BoundAssignment::Style::ModelDegenerate;
    out.copy_probs.assign(d, direction == Direction::Upper ? 1.0 : 0.0);
    out.copy_probs[0] = p;
    return out;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

bool verify_oblivious_bound(const Formula& f, const Formula& fprime,
                            const DissociationSpec& spec, double p,
                            const BoundAssignment& assignment, int y_limit) {
    if (!spec.unary())
        throw std::invalid_argument("verify_oblivious_bound: requires a unary spec");
    const auto& entry = spec.entries.front();
    if (assignment.copy_probs.size() != entry.fresh.size())
        throw std::invalid_argument("verify_oblivious_bound: assignment size != copy count");

    ProbMap p_orig{{entry.original, p}};
    ProbMap p_fresh;
    for (size_t j = 0; j < entry.fresh.size(); ++j)
        p_fresh[entry.fresh[j]] = assignment.copy_probs[j];

    std::set<VarId> fresh_set(entry.fresh.begin(), entry.fresh.end());
    std::set<VarId> ys_set = vars(f);
    ys_set.erase(entry.original);
    std::vector<VarId> ys(ys_set.begin(), ys_set.end());
    if (static_cast<int>(ys.size()) > y_limit)
        throw std::invalid_argument("verify_oblivious_bound: too many y-variables");

    const double tol = 1e-9;
    Valuation nu;
    for (uint64_t m = 0; m < (uint64_t{1} << ys.size()); ++m) {
        for (size_t i = 0; i < ys.size(); ++i) nu[ys[i]] = (m >> i) & 1u;
        double pf = shannon_prob(restrict(f, nu), p_orig);
        double pfp = shannon_prob(restrict(fprime, nu), p_fresh);
        if (assignment.direction == Direction::Upper) {
            if (pfp < pf - tol) return false;
        } else {
            if (pfp > pf + tol) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Bound pipeline
// ---------------------------------------------------------------------------

std::string BoundReport::render_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "direction: " << (direction == Direction::Upper ? "upper" : "lower") << "\n";
    os << "treatment: " << (disjunctive ? "disjunctive" : "conjunctive");
    if (sufficient_condition_only) os << " (multi-variable, sufficient-condition)";
    os << "\n";
    os << "bound: " << bound << "\n";
    for (const auto& line : lines) {
        os << "variable " << line.original << ": " << line.occurrences << " occurrences -> "
           << line.copies << " copies, p' = [";
        for (size_t i = 0; i < line.copy_probs.size(); ++i) {
            if (i) os << ", ";
            os << line.copy_probs[i];
        }
        os << "]\n";
    }
    return os.str();
}

std::string BoundReport::render_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "variable,occurrences,copies,assignment,bound\n";
    for (const auto& line : lines) {
        os << line.original << ',' << line.occurrences << ',' << line.copies << ',';
        for (size_t i = 0; i < line.copy_probs.size(); ++i) {
            if (i) os << ';';
            os << line.copy_probs[i];
        }
        os << ',' << bound << "\n";
    }
    return os.str();
}

BoundReport bound_pipeline(const Formula& f, const ProbMap& p, const std::set<VarId>& xs,
                           Direction direction) {
    // Clause shape decides the copy treatment: DNF disjunctive, CNF conjunctive.
    std::optional<NormalForm> nf = as_normal_form(f, NormalForm::Kind::Dnf);
    if (!nf) nf = as_normal_form(f, NormalForm::Kind::Cnf);
    if (!nf) nf = minimize_monotone_dnf(f);
    *nf = absorb(std::move(*nf));
    bool disjunctive = nf->kind == NormalForm::Kind::Dnf;

    auto [fprime, spec] = eager_dissociate(to_formula(*nf), xs);

    std::optional<NormalForm> nfp = as_normal_form(fprime, nf->kind);
    if (!nfp) throw std::logic_error("bound_pipeline: dissociation changed the clause shape");
    auto tree = readonce_factorize(*nfp);
    if (!tree)
        throw NotReadOnceError(
            "bound_pipeline: dissociated formula does not factorize read-once");

    BoundReport report;
    report.direction = direction;
    report.disjunctive = disjunctive;
    report.sufficient_condition_only = xs.size() > 1;
    report.tree = *tree;

    ProbMap tree_probs;
    for (const auto& v : vars(fprime)) {
        auto it = p.find(v);
        if (it != p.end()) tree_probs[v] = it->second;
    }
    auto shape = disjunctive ? DissociationKind::Shape::Disjunctive
                             : DissociationKind::Shape::Conjunctive;
    for (const auto& entry : spec.entries) {
        auto it = p.find(entry.original);
        if (it == p.end())
            throw std::invalid_argument("bound_pipeline: no probability for " +
                                        entry.original.name());
        int d = static_cast<int>(entry.fresh.size());
        BoundAssignment assignment = oblivious_assignment(shape, direction, it->second, d);
        for (int j = 0; j < d; ++j) tree_probs[entry.fresh[j]] = assignment.copy_probs[j];

        BoundReport::VarLine line;
        line.original = entry.original;
        line.occurrences = d;  // eager: one copy per occurrence
        line.copies = d;
        line.copy_probs = assignment.copy_probs;
        report.lines.push_back(std::move(line));
    }
    for (const auto& v : tree->vars()) {
        if (!tree_probs.count(v))
            throw std::invalid_argument("bound_pipeline: no probability for " + v.name());
    }
    report.bound = readonce_prob(*tree, tree_probs);
    return report;
}

}  // namespace dissoc
