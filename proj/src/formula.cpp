#include "dissoc/formula.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <sstream>

namespace dissoc {

std::ostream& operator<<(std::ostream& os, const VarId& v) { return os << v.name(); }

Formula Formula::constant(bool value) {
    auto node = std::make_shared<Node>();
    node->kind = value ? Kind::True : Kind::False;
    return Formula(std::move(node));
}

Formula Formula::lit(VarId v, bool positive) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Lit;
    node->var = std::move(v);
    node->positive = positive;
    return Formula(std::move(node));
}

Formula Formula::conj(std::vector<Formula> children) {
    if (children.empty()) throw std::invalid_argument("conj: empty child list");
    auto node = std::make_shared<Node>();
    node->kind = Kind::And;
    node->children = std::move(children);
    return Formula(std::move(node));
}

Formula Formula::disj(std::vector<Formula> children) {
    if (children.empty()) throw std::invalid_argument("disj: empty child list");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Or;
    node->children = std::move(children);
    return Formula(std::move(node));
}

bool Formula::is_constant(bool value) const {
    return kind() == (value ? Kind::True : Kind::False);
}

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return true;
        case Formula::Kind::Lit:
            return a.var() == b.var() && a.positive() == b.positive();
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            const auto& ca = a.children();
            const auto& cb = b.children();
            if (ca.size() != cb.size()) return false;
            for (size_t i = 0; i < ca.size(); ++i)
                if (ca[i] != cb[i]) return false;
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Formula parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty formula", 0);
        Formula f = parse_or();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return f;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                       text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool eat(std::string_view token) {
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    bool at_or_op() {
        return pos_ < text_.size() && (text_[pos_] == '|' || text_.substr(pos_, 3) == "\xe2\x88\xa8");
    }

    bool at_and_op() {
        return pos_ < text_.size() && (text_[pos_] == '&' || text_.substr(pos_, 3) == "\xe2\x88\xa7");
    }

    bool at_atom_start() {
        if (pos_ >= text_.size()) return false;
        char c = text_[pos_];
        return c == '(' || c == '!' || c == '0' || c == '1' || is_ident_start(c) ||
               text_.substr(pos_, 2) == "\xc2\xac";
    }

    static bool is_ident_start(char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }

    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9') || c == '.' || c == '\'';
    }

    Formula parse_or() {
        std::vector<Formula> terms;
        terms.push_back(parse_and());
        skip_ws();
        while (at_or_op()) {
            if (!eat("|")) eat("\xe2\x88\xa8");
            skip_ws();
            terms.push_back(parse_and());
            skip_ws();
        }
        return terms.size() == 1 ? terms.front() : Formula::disj(std::move(terms));
    }

    Formula parse_and() {
        std::vector<Formula> factors;
        factors.push_back(parse_unary());
        skip_ws();
        while (true) {
            if (at_and_op()) {
                if (!eat("&")) eat("\xe2\x88\xa7");
                skip_ws();
            } else if (!at_atom_start()) {
                break;  // juxtaposition ends at '|' , ')' or end of input
            }
            factors.push_back(parse_unary());
            skip_ws();
        }
        return factors.size() == 1 ? factors.front() : Formula::conj(std::move(factors));
    }

    Formula parse_unary() {
        skip_ws();
        if (eat("!") || eat("\xc2\xac")) return complement(parse_unary());
        return parse_atom();
    }

    Formula parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Formula f = parse_or();
            skip_ws();
            if (!eat(")")) throw ParseError("expected ')'", pos_);
            return f;
        }
        if (c == '0' || c == '1') {
            // constants are single tokens; a digit cannot start an identifier
            ++pos_;
            return Formula::constant(c == '1');
        }
        if (!is_ident_start(c)) throw ParseError("expected variable, constant or '('", pos_);
        size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        return Formula::lit(VarId(std::string(text_.substr(start, pos_ - start))));
    }
};

void print_node(std::ostream& os, const Formula& f, bool parenthesize_or) {
    switch (f.kind()) {
        case Formula::Kind::True:
            os << '1';
            break;
        case Formula::Kind::False:
            os << '0';
            break;
        case Formula::Kind::Lit:
            if (!f.positive()) os << '!';
            os << f.var();
            break;
        case Formula::Kind::And: {
            bool first = true;
            for (const auto& c : f.children()) {
                if (!first) os << ' ';
                first = false;
                print_node(os, c, /*parenthesize_or=*/true);
            }
            break;
        }
        case Formula::Kind::Or: {
            if (parenthesize_or) os << '(';
            bool first = true;
            for (const auto& c : f.children()) {
                if (!first) os << " | ";
                first = false;
                print_node(os, c, /*parenthesize_or=*/false);
            }
            if (parenthesize_or) os << ')';
            break;
        }
    }
}

}  // namespace

Formula parse_formula(std::string_view text) {
    return Parser(text).parse();
}

std::string to_string(const Formula& f) {
    std::ostringstream os;
    print_node(os, f, false);
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Formula& f) {
    print_node(os, f, false);
    return os;
}

// ---------------------------------------------------------------------------
// Traversals
// ---------------------------------------------------------------------------

namespace {

template <typename Fn>
void visit_literals(const Formula& f, Fn&& fn) {
    switch (f.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return;
        case Formula::Kind::Lit:
            fn(f.var(), f.positive());
            return;
        case Formula::Kind::And:
        case Formula::Kind::Or:
            for (const auto& c : f.children()) visit_literals(c, fn);
            return;
    }
}

}  // namespace

std::set<VarId> vars(const Formula& f) {
    std::set<VarId> out;
    visit_literals(f, [&](const VarId& v, bool) { out.insert(v); });
    return out;
}

bool is_monotone(const Formula& f) {
    bool ok = true;
    visit_literals(f, [&](const VarId&, bool positive) { ok = ok && positive; });
    return ok;
}

bool is_monotone_in(const Formula& f, const VarId& v) {
    bool ok = true;
    visit_literals(f, [&](const VarId& u, bool positive) {
        if (u == v && !positive) ok = false;
    });
    return ok;
}

int count_occurrences(const Formula& f, const VarId& v) {
    int n = 0;
    visit_literals(f, [&](const VarId& u, bool) { n += (u == v); });
    return n;
}

Formula complement(const Formula& f) {
    switch (f.kind()) {
        case Formula::Kind::True:
            return Formula::constant(false);
        case Formula::Kind::False:
            return Formula::constant(true);
        case Formula::Kind::Lit:
            return Formula::lit(f.var(), !f.positive());
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<Formula> kids;
            kids.reserve(f.children().size());
            for (const auto& c : f.children()) kids.push_back(complement(c));
            return f.kind() == Formula::Kind::And ? Formula::disj(std::move(kids))
                                                  : Formula::conj(std::move(kids));
        }
    }
    throw std::logic_error("unreachable");
}

bool evaluate(const Formula& f, const Valuation& w) {
    switch (f.kind()) {
        case Formula::Kind::True:
            return true;
        case Formula::Kind::False:
            return false;
        case Formula::Kind::Lit: {
            auto it = w.find(f.var());
            if (it == w.end())
                throw std::invalid_argument("evaluate: no value for variable " + f.var().name());
            return f.positive() ? it->second : !it->second;
        }
        case Formula::Kind::And:
            for (const auto& c : f.children())
                if (!evaluate(c, w)) return false;
            return true;
        case Formula::Kind::Or:
            for (const auto& c : f.children())
                if (evaluate(c, w)) return true;
            return false;
    }
    throw std::logic_error("unreachable");
}

Formula restrict(const Formula& f, const Valuation& nu) {
    switch (f.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return f;
        case Formula::Kind::Lit: {
            auto it = nu.find(f.var());
            if (it == nu.end()) return f;
            return Formula::constant(f.positive() ? it->second : !it->second);
        }
        case Formula::Kind::And: {
            std::vector<Formula> kids;
            for (const auto& c : f.children()) {
                Formula r = restrict(c, nu);
                if (r.is_constant(false)) return Formula::constant(false);
                if (r.is_constant(true)) continue;
                kids.push_back(std::move(r));
            }
            if (kids.empty()) return Formula::constant(true);
            if (kids.size() == 1) return kids.front();
            return Formula::conj(std::move(kids));
        }
        case Formula::Kind::Or: {
            std::vector<Formula> kids;
            for (const auto& c : f.children()) {
                Formula r = restrict(c, nu);
                if (r.is_constant(true)) return Formula::constant(true);
                if (r.is_constant(false)) continue;
                kids.push_back(std::move(r));
            }
            if (kids.empty()) return Formula::constant(false);
            if (kids.size() == 1) return kids.front();
            return Formula::disj(std::move(kids));
        }
    }
    throw std::logic_error("unreachable");
}

Formula conj_valuation_function(const std::vector<Formula>& g, const std::vector<bool>& nu) {
    if (g.size() != nu.size())
        throw std::invalid_argument("conj_valuation_function: length mismatch");
    if (g.empty()) return Formula::constant(true);
    std::vector<Formula> parts;
    parts.reserve(g.size());
    for (size_t j = 0; j < g.size(); ++j)
        parts.push_back(nu[j] ? g[j] : complement(g[j]));
    return parts.size() == 1 ? parts.front() : Formula::conj(std::move(parts));
}

Formula substitute(const Formula& f, const std::map<VarId, VarId>& theta) {
    switch (f.kind()) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return f;
        case Formula::Kind::Lit: {
            auto it = theta.find(f.var());
            if (it == theta.end()) return f;
            return Formula::lit(it->second, f.positive());
        }
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<Formula> kids;
            kids.reserve(f.children().size());
            for (const auto& c : f.children()) kids.push_back(substitute(c, theta));
            return f.kind() == Formula::Kind::And ? Formula::conj(std::move(kids))
                                                  : Formula::disj(std::move(kids));
        }
    }
    throw std::logic_error("unreachable");
}

bool semantically_equal(const Formula& a, const Formula& b, int max_vars) {
    std::set<VarId> all = vars(a);
    std::set<VarId> vb = vars(b);
    all.insert(vb.begin(), vb.end());
    if (static_cast<int>(all.size()) > max_vars)
        throw std::invalid_argument("semantically_equal: too many variables");
    std::vector<VarId> order(all.begin(), all.end());
    Valuation w;
    for (uint64_t world = 0; world < (uint64_t{1} << order.size()); ++world) {
        for (size_t i = 0; i < order.size(); ++i) w[order[i]] = (world >> i) & 1;
        if (evaluate(a, w) != evaluate(b, w)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Monotone normal forms
// ---------------------------------------------------------------------------

Formula to_formula(const NormalForm& nf) {
    bool dnf = nf.kind == NormalForm::Kind::Dnf;
    if (nf.clauses.empty()) return Formula::constant(!dnf);
    std::vector<Formula> clause_formulas;
    clause_formulas.reserve(nf.clauses.size());
    for (const auto& clause : nf.clauses) {
        if (clause.empty()) {
            clause_formulas.push_back(Formula::constant(dnf));
            continue;
        }
        std::vector<Formula> lits;
        lits.reserve(clause.size());
        for (const auto& v : clause) lits.push_back(Formula::lit(v));
        if (lits.size() == 1)
            clause_formulas.push_back(lits.front());
        else
            clause_formulas.push_back(dnf ? Formula::conj(std::move(lits))
                                          : Formula::disj(std::move(lits)));
    }
    if (clause_formulas.size() == 1) return clause_formulas.front();
    return dnf ? Formula::disj(std::move(clause_formulas))
               : Formula::conj(std::move(clause_formulas));
}

namespace {

std::vector<VarId> normalize_clause(std::vector<VarId> clause) {
    std::sort(clause.begin(), clause.end());
    clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
    return clause;
}

void normalize_clause_list(std::vector<std::vector<VarId>>& clauses) {
    for (auto& c : clauses) c = normalize_clause(std::move(c));
    std::sort(clauses.begin(), clauses.end());
    clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
}

// Collects the literals of a flat clause (conjunction for DNF, disjunction
// for CNF); false if the subtree has the wrong shape or a negative literal.
bool collect_clause(const Formula& f, Formula::Kind inner, std::vector<VarId>& out) {
    if (f.kind() == Formula::Kind::Lit) {
        if (!f.positive()) return false;
        out.push_back(f.var());
        return true;
    }
    if (f.kind() == inner) {
        for (const auto& c : f.children())
            if (!collect_clause(c, inner, out)) return false;
        return true;
    }
    return false;
}

}  // namespace

std::optional<NormalForm> as_normal_form(const Formula& f, NormalForm::Kind kind) {
    bool dnf = kind == NormalForm::Kind::Dnf;
    Formula::Kind outer = dnf ? Formula::Kind::Or : Formula::Kind::And;
    Formula::Kind inner = dnf ? Formula::Kind::And : Formula::Kind::Or;
    NormalForm nf;
    nf.kind = kind;
    if (f.is_constant(dnf)) {  // 1 as DNF / 0 as CNF: single empty clause
        nf.clauses.push_back({});
        return nf;
    }
    if (f.is_constant(!dnf)) return nf;  // empty clause set
    std::vector<Formula> clause_nodes;
    if (f.kind() == outer)
        clause_nodes = f.children();
    else
        clause_nodes = {f};
    for (const auto& cn : clause_nodes) {
        std::vector<VarId> clause;
        if (!collect_clause(cn, inner, clause)) return std::nullopt;
        nf.clauses.push_back(normalize_clause(std::move(clause)));
    }
    normalize_clause_list(nf.clauses);
    return nf;
}

NormalForm absorb(NormalForm nf) {
    normalize_clause_list(nf.clauses);
    // an empty clause absorbs everything (constant for the respective kind)
    for (const auto& c : nf.clauses) {
        if (c.empty()) {
            nf.clauses = {{}};
            return nf;
        }
    }
    std::vector<std::vector<VarId>> kept;
    for (size_t i = 0; i < nf.clauses.size(); ++i) {
        bool subsumed = false;
        for (size_t j = 0; j < nf.clauses.size() && !subsumed; ++j) {
            if (i == j) continue;
            const auto& a = nf.clauses[j];
            const auto& b = nf.clauses[i];
            if (a.size() < b.size())
                subsumed = std::includes(b.begin(), b.end(), a.begin(), a.end());
        }
        if (!subsumed) kept.push_back(nf.clauses[i]);
    }
    nf.clauses = std::move(kept);
    return nf;
}

namespace {

// Distributes clause-of-clauses products under a size guard.
std::vector<std::vector<VarId>> cross_clauses(const std::vector<std::vector<VarId>>& a,
                                              const std::vector<std::vector<VarId>>& b,
                                              size_t clause_limit) {
    std::vector<std::vector<VarId>> out;
    for (const auto& ca : a) {
        for (const auto& cb : b) {
            std::vector<VarId> merged(ca);
            merged.insert(merged.end(), cb.begin(), cb.end());
            out.push_back(normalize_clause(std::move(merged)));
            if (out.size() > clause_limit)
                throw std::runtime_error("normal form expansion exceeds clause limit");
        }
    }
    normalize_clause_list(out);
    return out;
}

// Clause expansion of a monotone formula: DNF for target Dnf, CNF for Cnf.
std::vector<std::vector<VarId>> expand(const Formula& f, NormalForm::Kind target,
                                       size_t clause_limit) {
    bool dnf = target == NormalForm::Kind::Dnf;
    switch (f.kind()) {
        case Formula::Kind::True:
            return dnf ? std::vector<std::vector<VarId>>{{}} : std::vector<std::vector<VarId>>{};
        case Formula::Kind::False:
            return dnf ? std::vector<std::vector<VarId>>{} : std::vector<std::vector<VarId>>{{}};
        case Formula::Kind::Lit:
            return {{f.var()}};
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            // For the "multiplicative" connective of the target kind, clause
            // sets combine by cross product; for the other one, by union.
            bool multiplicative = (f.kind() == Formula::Kind::And) == dnf;
            std::vector<std::vector<VarId>> acc;
            bool first = true;
            for (const auto& c : f.children()) {
                auto part = expand(c, target, clause_limit);
                if (first) {
                    acc = std::move(part);
                    first = false;
                } else if (multiplicative) {
                    acc = cross_clauses(acc, part, clause_limit);
                } else {
                    acc.insert(acc.end(), part.begin(), part.end());
                    if (acc.size() > clause_limit)
                        throw std::runtime_error("normal form expansion exceeds clause limit");
                }
            }
            normalize_clause_list(acc);
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

NormalForm minimize_monotone_dnf(const Formula& f, size_t clause_limit) {
    if (!is_monotone(f))
        throw std::invalid_argument("minimize_monotone_dnf: formula is not monotone");
    NormalForm nf;
    nf.kind = NormalForm::Kind::Dnf;
    nf.clauses = expand(f, NormalForm::Kind::Dnf, clause_limit);
    return absorb(std::move(nf));
}

NormalForm dualize(const NormalForm& nf, size_t clause_limit) {
    NormalForm::Kind target =
        nf.kind == NormalForm::Kind::Dnf ? NormalForm::Kind::Cnf : NormalForm::Kind::Dnf;
    NormalForm out;
    out.kind = target;
    out.clauses = expand(to_formula(nf), target, clause_limit);
    out = absorb(std::move(out));
    return out;
}

bool PrimalGraph::has_edge(const VarId& u, const VarId& v) const {
    auto e = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    return edges.count(e) > 0;
}

PrimalGraph primal_graph(const NormalForm& nf) {
    PrimalGraph g;
    for (const auto& clause : nf.clauses) {
        for (const auto& v : clause) g.nodes.insert(v);
        for (size_t i = 0; i < clause.size(); ++i)
            for (size_t j = i + 1; j < clause.size(); ++j)
                g.edges.emplace(clause[i], clause[j]);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Independent-or and disjoint declarations
// ---------------------------------------------------------------------------

double ior(std::span<const double> ps) {
    double miss = 1.0;
    for (double p : ps) miss *= (1.0 - p);
    return 1.0 - miss;
}

double ior(std::initializer_list<double> ps) {
    return ior(std::span<const double>(ps.begin(), ps.size()));
}

DisjointEncoding encode_disjoint_declaration(const DisjointDeclaration& d) {
    const size_t k = d.probs.size();
    if (k == 0 || d.values.size() != k)
        throw std::invalid_argument("disjoint declaration: values/probs mismatch");
    double sum = 0.0;
    for (double q : d.probs) {
        if (q < 0.0) throw std::invalid_argument("disjoint declaration: negative probability");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("disjoint declaration: probabilities do not sum to 1");

    DisjointEncoding enc;
    double remaining = 1.0;  // 1 - q_1 - ... - q_{i-1}
    for (size_t i = 0; i + 1 < k; ++i) {
        VarId z("z" + std::to_string(i + 1));
        enc.z_vars.push_back(z);
        enc.z_probs[z] = remaining <= 1e-15 ? 0.0 : d.probs[i] / remaining;
        remaining -= d.probs[i];
    }
    for (size_t i = 0; i < k; ++i) {
        std::vector<Formula> lits;
        for (size_t j = 0; j < i && j < enc.z_vars.size(); ++j)
            lits.push_back(Formula::lit(enc.z_vars[j], false));
        if (i < enc.z_vars.size()) lits.push_back(Formula::lit(enc.z_vars[i], true));
        if (lits.empty())
            enc.events.push_back(Formula::constant(true));  // k == 1
        else if (lits.size() == 1)
            enc.events.push_back(lits.front());
        else
            enc.events.push_back(Formula::conj(std::move(lits)));
    }
    return enc;
}

}  // namespace dissoc
