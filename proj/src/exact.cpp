#include "dissoc/exact.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace dissoc {

// ---------------------------------------------------------------------------
// CompiledFormula
// ---------------------------------------------------------------------------

CompiledFormula::CompiledFormula(const Formula& f) {
    std::set<VarId> vs = vars(f);
    variables_.assign(vs.begin(), vs.end());
    std::map<VarId, int> index;
    for (size_t i = 0; i < variables_.size(); ++i) index[variables_[i]] = static_cast<int>(i);
    root_ = build(f, index);
}

int CompiledFormula::build(const Formula& f, const std::map<VarId, int>& index) {
    Instr instr;
    switch (f.kind()) {
        case Formula::Kind::True:
            instr.op = Op::True;
            break;
        case Formula::Kind::False:
            instr.op = Op::False;
            break;
        case Formula::Kind::Lit:
            instr.op = Op::Lit;
            instr.var = index.at(f.var());
            instr.positive = f.positive();
            break;
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            instr.op = f.kind() == Formula::Kind::And ? Op::And : Op::Or;
            std::vector<int> kids;
            kids.reserve(f.children().size());
            for (const auto& c : f.children()) kids.push_back(build(c, index));
            instr.first_child = static_cast<int>(child_slots_.size());
            instr.num_children = static_cast<int>(kids.size());
            child_slots_.insert(child_slots_.end(), kids.begin(), kids.end());
            break;
        }
    }
    instrs_.push_back(instr);
    return static_cast<int>(instrs_.size() - 1);
}

bool CompiledFormula::eval_node(int node, uint32_t world) const {
    const Instr& in = instrs_[node];
    switch (in.op) {
        case Op::True:
            return true;
        case Op::False:
            return false;
        case Op::Lit: {
            bool bit = (world >> in.var) & 1u;
            return in.positive ? bit : !bit;
        }
        case Op::And:
            for (int i = 0; i < in.num_children; ++i)
                if (!eval_node(child_slots_[in.first_child + i], world)) return false;
            return true;
        case Op::Or:
            for (int i = 0; i < in.num_children; ++i)
                if (eval_node(child_slots_[in.first_child + i], world)) return true;
            return false;
    }
    return false;
}

bool CompiledFormula::evaluate(uint32_t world) const { return eval_node(root_, world); }

double CompiledFormula::probability(std::span<const double> probs) const {
    const size_t n = variables_.size();
    double total = 0.0;
    for (uint64_t world = 0; world < (uint64_t{1} << n); ++world) {
        if (!evaluate(static_cast<uint32_t>(world))) continue;
        double w = 1.0;
        for (size_t i = 0; i < n; ++i)
            w *= ((world >> i) & 1u) ? probs[i] : 1.0 - probs[i];
        total += w;
    }
    return total;
}

double brute_force_prob(const Formula& f, const ProbMap& p, int max_vars) {
    CompiledFormula cf(f);
    if (static_cast<int>(cf.variables().size()) > max_vars)
        throw std::invalid_argument("brute_force_prob: too many variables (" +
                                    std::to_string(cf.variables().size()) + " > " +
                                    std::to_string(max_vars) + ")");
    std::vector<double> probs;
    probs.reserve(cf.variables().size());
    for (const auto& v : cf.variables()) {
        auto it = p.find(v);
        if (it == p.end())
            throw std::invalid_argument("brute_force_prob: no probability for " + v.name());
        probs.push_back(it->second);
    }
    return cf.probability(probs);
}

// ---------------------------------------------------------------------------
// Shannon expansion
// ---------------------------------------------------------------------------

namespace {

VarId most_frequent_var(const Formula& f) {
    std::map<VarId, int> counts;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        switch (g.kind()) {
            case Formula::Kind::Lit:
                counts[g.var()]++;
                break;
            case Formula::Kind::And:
            case Formula::Kind::Or:
                for (const auto& c : g.children()) walk(c);
                break;
            default:
                break;
        }
    };
    walk(f);
    VarId best;
    int best_count = -1;
    for (const auto& [v, n] : counts) {  // map order breaks ties lexicographically
        if (n > best_count) {
            best = v;
            best_count = n;
        }
    }
    return best;
}

struct ShannonState {
    const ProbMap& p;
    size_t budget;
    size_t expanded = 0;
    std::unordered_map<std::string, double> memo;

    double run(const Formula& f) {
        if (f.is_constant(true)) return 1.0;
        if (f.is_constant(false)) return 0.0;
        if (f.kind() == Formula::Kind::Lit) {
            auto it = p.find(f.var());
            if (it == p.end())
                throw std::invalid_argument("shannon_prob: no probability for " + f.var().name());
            return f.positive() ? it->second : 1.0 - it->second;
        }
        std::string key = to_string(f);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (++expanded > budget) throw std::runtime_error("shannon_prob: node budget exceeded");
        VarId pivot = most_frequent_var(f);
        auto it = p.find(pivot);
        if (it == p.end())
            throw std::invalid_argument("shannon_prob: no probability for " + pivot.name());
        double pv = it->second;
        double hi = run(restrict(f, {{pivot, true}}));
        double lo = run(restrict(f, {{pivot, false}}));
        double result = pv * hi + (1.0 - pv) * lo;
        memo.emplace(std::move(key), result);
        return result;
    }
};

}  // namespace

double shannon_prob(const Formula& f, const ProbMap& p, size_t node_budget) {
    ShannonState state{p, node_budget, 0, {}};
    return state.run(f);
}

// ---------------------------------------------------------------------------
// Read-once trees
// ---------------------------------------------------------------------------

ReadOnceTree ReadOnceTree::leaf(VarId v) {
    ReadOnceTree t;
    t.kind_ = Kind::Leaf;
    t.var_ = std::move(v);
    return t;
}

ReadOnceTree ReadOnceTree::conj(std::vector<ReadOnceTree> children) {
    if (children.size() == 1) return children.front();
    if (children.empty()) throw std::invalid_argument("ReadOnceTree::conj: empty child list");
    ReadOnceTree t;
    t.kind_ = Kind::And;
    t.children_ = std::move(children);
    return t;
}

ReadOnceTree ReadOnceTree::disj(std::vector<ReadOnceTree> children) {
    if (children.size() == 1) return children.front();
    if (children.empty()) throw std::invalid_argument("ReadOnceTree::disj: empty child list");
    ReadOnceTree t;
    t.kind_ = Kind::Or;
    t.children_ = std::move(children);
    return t;
}

Formula ReadOnceTree::to_formula() const {
    switch (kind_) {
        case Kind::Leaf:
            return Formula::lit(var_);
        case Kind::And:
        case Kind::Or: {
            std::vector<Formula> kids;
            kids.reserve(children_.size());
            for (const auto& c : children_) kids.push_back(c.to_formula());
            return kind_ == Kind::And ? Formula::conj(std::move(kids))
                                      : Formula::disj(std::move(kids));
        }
    }
    throw std::logic_error("unreachable");
}

std::set<VarId> ReadOnceTree::vars() const {
    if (kind_ == Kind::Leaf) return {var_};
    std::set<VarId> out;
    for (const auto& c : children_) {
        auto sub = c.vars();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Read-once factorization
// ---------------------------------------------------------------------------

namespace {

using ClauseList = std::vector<std::vector<VarId>>;

// Groups clauses into connected components under shared variables, ordered by
// their smallest variable.
std::vector<ClauseList> clause_components(const ClauseList& clauses) {
    const size_t n = clauses.size();
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    std::map<VarId, size_t> seen;
    for (size_t i = 0; i < n; ++i) {
        for (const auto& v : clauses[i]) {
            auto [it, inserted] = seen.emplace(v, i);
            if (!inserted) parent[find(i)] = find(it->second);
        }
    }
    std::map<size_t, ClauseList> groups;
    for (size_t i = 0; i < n; ++i) groups[find(i)].push_back(clauses[i]);
    std::vector<std::pair<VarId, ClauseList>> ordered;
    for (auto& [root, group] : groups) {
        VarId smallest = group.front().front();
        for (const auto& c : group)
            for (const auto& v : c)
                if (v < smallest) smallest = v;
        ordered.emplace_back(smallest, std::move(group));
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ClauseList> out;
    out.reserve(ordered.size());
    for (auto& [_, group] : ordered) out.push_back(std::move(group));
    return out;
}

std::optional<ReadOnceTree> factorize(NormalForm::Kind kind, ClauseList clauses,
                                      size_t dual_limit);

// The inner connective of a clause: And for DNF clauses, Or for CNF.
ReadOnceTree clause_tree(NormalForm::Kind kind, const std::vector<VarId>& clause) {
    std::vector<ReadOnceTree> leaves;
    leaves.reserve(clause.size());
    for (const auto& v : clause) leaves.push_back(ReadOnceTree::leaf(v));
    return kind == NormalForm::Kind::Dnf ? ReadOnceTree::conj(std::move(leaves))
                                         : ReadOnceTree::disj(std::move(leaves));
}

ReadOnceTree combine_outer(NormalForm::Kind kind, std::vector<ReadOnceTree> parts) {
    return kind == NormalForm::Kind::Dnf ? ReadOnceTree::disj(std::move(parts))
                                         : ReadOnceTree::conj(std::move(parts));
}

ReadOnceTree combine_inner(NormalForm::Kind kind, std::vector<ReadOnceTree> parts) {
    return kind == NormalForm::Kind::Dnf ? ReadOnceTree::conj(std::move(parts))
                                         : ReadOnceTree::disj(std::move(parts));
}

std::optional<ReadOnceTree> factorize(NormalForm::Kind kind, ClauseList clauses,
                                      size_t dual_limit) {
    if (clauses.empty()) return std::nullopt;  // constant, not representable as a tree
    for (const auto& c : clauses)
        if (c.empty()) return std::nullopt;
    if (clauses.size() == 1) return clause_tree(kind, clauses.front());

    // (a) clauses over disjoint variable sets
    auto components = clause_components(clauses);
    if (components.size() > 1) {
        std::vector<ReadOnceTree> parts;
        parts.reserve(components.size());
        for (auto& comp : components) {
            auto sub = factorize(kind, std::move(comp), dual_limit);
            if (!sub) return std::nullopt;
            parts.push_back(std::move(*sub));
        }
        return combine_outer(kind, std::move(parts));
    }

    // (b) variables occurring in every clause factor out
    std::vector<VarId> common = clauses.front();
    for (size_t i = 1; i < clauses.size() && !common.empty(); ++i) {
        std::vector<VarId> next;
        std::set_intersection(common.begin(), common.end(), clauses[i].begin(), clauses[i].end(),
                              std::back_inserter(next));
        common = std::move(next);
    }
    if (!common.empty()) {
        ClauseList remainder;
        remainder.reserve(clauses.size());
        for (const auto& c : clauses) {
            std::vector<VarId> rest;
            std::set_difference(c.begin(), c.end(), common.begin(), common.end(),
                                std::back_inserter(rest));
            // an empty remainder clause would have absorbed all others
            if (rest.empty()) return std::nullopt;
            remainder.push_back(std::move(rest));
        }
        auto sub = factorize(kind, std::move(remainder), dual_limit);
        if (!sub) return std::nullopt;
        std::vector<ReadOnceTree> parts;
        parts.reserve(common.size() + 1);
        for (const auto& v : common) parts.push_back(ReadOnceTree::leaf(v));
        parts.push_back(std::move(*sub));
        return combine_inner(kind, std::move(parts));
    }

    // (c) cross-product split: variable groups found via the dual clause set
    NormalForm self;
    self.kind = kind;
    self.clauses = clauses;
    NormalForm dual;
    try {
        dual = dualize(self, dual_limit);
    } catch (const std::runtime_error&) {
        return std::nullopt;  // undecided within budget; report not read-once
    }
    auto dual_components = clause_components(dual.clauses);
    if (dual_components.size() < 2) return std::nullopt;
    std::set<VarId> all_vars;
    for (const auto& c : clauses) all_vars.insert(c.begin(), c.end());

    std::vector<ReadOnceTree> parts;
    size_t product = 1;
    std::set<VarId> covered;
    for (const auto& comp : dual_components) {
        std::set<VarId> group;
        for (const auto& c : comp) group.insert(c.begin(), c.end());
        covered.insert(group.begin(), group.end());
        ClauseList projected;
        for (const auto& c : clauses) {
            std::vector<VarId> proj;
            for (const auto& v : c)
                if (group.count(v)) proj.push_back(v);
            if (proj.empty()) return std::nullopt;
            projected.push_back(std::move(proj));
        }
        std::sort(projected.begin(), projected.end());
        projected.erase(std::unique(projected.begin(), projected.end()), projected.end());
        product *= projected.size();
        auto sub = factorize(kind, std::move(projected), dual_limit);
        if (!sub) return std::nullopt;
        parts.push_back(std::move(*sub));
    }
    // the groups must cover every variable and every combination of
    // projections must be a clause
    if (covered != all_vars || product != clauses.size()) return std::nullopt;
    return combine_inner(kind, std::move(parts));
}

}  // namespace

std::optional<ReadOnceTree> readonce_factorize(const NormalForm& nf, size_t dual_clause_limit) {
    return factorize(nf.kind, nf.clauses, dual_clause_limit);
}

double readonce_prob(const ReadOnceTree& t, const ProbMap& p) {
    switch (t.kind()) {
        case ReadOnceTree::Kind::Leaf: {
            auto it = p.find(t.var());
            if (it == p.end())
                throw std::invalid_argument("readonce_prob: no probability for " + t.var().name());
            return it->second;
        }
        case ReadOnceTree::Kind::And: {
            double prod = 1.0;
            for (const auto& c : t.children()) prod *= readonce_prob(c, p);
            return prod;
        }
        case ReadOnceTree::Kind::Or: {
            double miss = 1.0;
            for (const auto& c : t.children()) miss *= 1.0 - readonce_prob(c, p);
            return 1.0 - miss;
        }
    }
    throw std::logic_error("unreachable");
}

double conditional_prob(const VarId& x, const Formula& f, const ProbMap& p) {
    double denom = shannon_prob(f, p);
    if (denom <= 0.0)
        throw std::domain_error("conditional_prob: conditioning on probability-zero event");
    double numer = shannon_prob(Formula::conj({Formula::lit(x), f}), p);
    return numer / denom;
}

double prob_by_y_expansion(const Formula& f, const ProbMap& x_probs, const ProbMap& y_probs,
                           int max_y) {
    std::set<VarId> fv = vars(f);
    for (const auto& v : fv) {
        bool in_x = x_probs.count(v) > 0;
        bool in_y = y_probs.count(v) > 0;
        if (in_x == in_y)
            throw std::invalid_argument("prob_by_y_expansion: variable " + v.name() +
                                        (in_x ? " in both parts" : " in neither part"));
    }
    std::vector<VarId> ys;
    std::vector<double> qs;
    for (const auto& [v, q] : y_probs) {
        if (!fv.count(v)) continue;
        ys.push_back(v);
        qs.push_back(q);
    }
    if (static_cast<int>(ys.size()) > max_y)
        throw std::invalid_argument("prob_by_y_expansion: too many y-variables");

    double total = 0.0;
    Valuation nu;
    for (uint64_t m = 0; m < (uint64_t{1} << ys.size()); ++m) {
        double weight = 1.0;
        for (size_t i = 0; i < ys.size(); ++i) {
            bool bit = (m >> i) & 1u;
            nu[ys[i]] = bit;
            weight *= bit ? qs[i] : 1.0 - qs[i];
        }
        if (weight == 0.0) continue;
        total += weight * shannon_prob(restrict(f, nu), x_probs);
    }
    return total;
}

}  // namespace dissoc
