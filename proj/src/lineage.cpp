#include "dissoc/lineage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include "dissoc/exact.hpp"
#include "json.hpp"

namespace dissoc {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Database loading
// ---------------------------------------------------------------------------

const Relation* TupleDB::find(const std::string& name_or_alias) const {
    for (const auto& r : relations)
        if (r.name == name_or_alias || (!r.alias.empty() && r.alias == name_or_alias)) return &r;
    return nullptr;
}

ProbMap TupleDB::tuple_probs() const {
    ProbMap out;
    for (const auto& r : relations)
        for (const auto& row : r.rows) out[row.tuple_id] = row.prob;
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

TupleDB load_db(const std::string& directory) {
    fs::path dir(directory);
    std::ifstream manifest_in(dir / "manifest.json");
    if (!manifest_in) throw std::runtime_error("load_db: cannot open " + (dir / "manifest.json").string());
    nlohmann::json manifest = nlohmann::json::parse(manifest_in);

    TupleDB db;
    for (const auto& rj : manifest.at("relations")) {
        Relation rel;
        rel.name = rj.at("name").get<std::string>();
        rel.alias = rj.value("alias", std::string());
        rel.deterministic = rj.value("deterministic", false);
        std::string prefix = rj.value("var_prefix", to_lower(rel.name) + "_");
        std::string file = rj.value("file", rel.name + ".csv");

        std::ifstream in(dir / file);
        if (!in) throw std::runtime_error("load_db: cannot open " + (dir / file).string());
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error("load_db: " + file + " is empty (missing header)");
        std::vector<std::string> header = split_csv_line(line);
        bool has_prob = !rel.deterministic;
        if (has_prob) {
            if (header.empty() || header.back() != "p")
                throw std::runtime_error("load_db: " + file + " must end with a \"p\" column");
            header.pop_back();
        }
        rel.attributes = header;

        int row_index = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> fields = split_csv_line(line);
            size_t expected = rel.attributes.size() + (has_prob ? 1 : 0);
            if (fields.size() != expected)
                throw std::runtime_error("load_db: " + file + ": wrong field count in row " +
                                         std::to_string(row_index + 1));
            TupleRow row;
            row.prob = 1.0;
            if (has_prob) {
                try {
                    row.prob = std::stod(fields.back());
                } catch (const std::exception&) {
                    throw std::runtime_error("load_db: " + file + ": bad probability in row " +
                                             std::to_string(row_index + 1));
                }
                if (row.prob < 0.0 || row.prob > 1.0)
                    throw std::runtime_error("load_db: " + file + ": probability outside [0,1] in row " +
                                             std::to_string(row_index + 1));
                fields.pop_back();
            }
            row.values = std::move(fields);
            row.tuple_id = VarId(prefix + std::to_string(row_index + 1));
            rel.rows.push_back(std::move(row));
            ++row_index;
        }
        db.relations.push_back(std::move(rel));
    }
    return db;
}

// ---------------------------------------------------------------------------
// Query parsing
// ---------------------------------------------------------------------------

namespace {

struct QueryLexer {
    std::string_view text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eat(std::string_view tok) {
        skip_ws();
        if (text.substr(pos, tok.size()) == tok) {
            pos += tok.size();
            return true;
        }
        return false;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (pos == start) throw std::runtime_error("parse_query: expected identifier at " +
                                                   std::to_string(start));
        return std::string(text.substr(start, pos - start));
    }
    std::string value_token() {
        skip_ws();
        if (pos < text.size() && text[pos] == '\'') {
            size_t start = ++pos;
            while (pos < text.size() && text[pos] != '\'') ++pos;
            if (pos >= text.size()) throw std::runtime_error("parse_query: unterminated string");
            return std::string(text.substr(start, (pos++) - start));
        }
        size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != ',' && text[pos] != ')')
            ++pos;
        if (pos == start) throw std::runtime_error("parse_query: expected value");
        return std::string(text.substr(start, pos - start));
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
};

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

ConjQuery parse_query(std::string_view text) {
    QueryLexer lex{text};
    ConjQuery q;
    q.head_name = lex.ident();
    if (!lex.eat("(")) throw std::runtime_error("parse_query: expected '(' after head name");
    if (!lex.eat(")")) {
        do {
            q.head_vars.push_back(lex.ident());
        } while (lex.eat(","));
        if (!lex.eat(")")) throw std::runtime_error("parse_query: expected ')' in head");
    }
    if (!lex.eat(":-") && !lex.eat(":\xe2\x88\x92"))
        throw std::runtime_error("parse_query: expected ':-'");

    do {
        std::string name = lex.ident();
        if (lex.eat("(")) {
            Atom atom;
            atom.relation = name;
            if (!lex.eat(")")) {
                do {
                    lex.skip_ws();
                    if (lex.peek() == '\'' || std::isdigit(static_cast<unsigned char>(lex.peek()))) {
                        atom.args.push_back({false, lex.value_token()});
                    } else {
                        atom.args.push_back({true, lex.ident()});
                    }
                } while (lex.eat(","));
                if (!lex.eat(")")) throw std::runtime_error("parse_query: expected ')' in atom");
            }
            q.atoms.push_back(std::move(atom));
        } else {
            Predicate pred;
            pred.variable = name;
            if (lex.eat("<=")) pred.op = Predicate::Op::Le;
            else if (lex.eat(">=")) pred.op = Predicate::Op::Ge;
            else if (lex.eat("<")) pred.op = Predicate::Op::Lt;
            else if (lex.eat(">")) pred.op = Predicate::Op::Gt;
            else if (lex.eat("=")) pred.op = Predicate::Op::Eq;
            else if (lex.eat("like") || lex.eat("LIKE")) pred.op = Predicate::Op::Like;
            else throw std::runtime_error("parse_query: expected comparison operator after " + name);
            pred.rhs = lex.value_token();
            q.predicates.push_back(std::move(pred));
        }
    } while (lex.eat(","));
    if (!lex.at_end()) throw std::runtime_error("parse_query: trailing input");

    std::set<std::string> seen_relations;
    std::set<std::string> atom_vars;
    for (const auto& atom : q.atoms) {
        if (!seen_relations.insert(atom.relation).second)
            throw std::runtime_error("parse_query: self-join on " + atom.relation +
                                     " is not supported");
        for (const auto& t : atom.args)
            if (t.is_var) atom_vars.insert(t.text);
    }
    for (const auto& h : q.head_vars)
        if (!atom_vars.count(h))
            throw std::runtime_error("parse_query: head variable " + h + " unbound");
    for (const auto& p : q.predicates)
        if (!atom_vars.count(p.variable))
            throw std::runtime_error("parse_query: predicate variable " + p.variable + " unbound");
    return q;
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

namespace {

std::string resolve_rhs(const std::string& rhs, const Params& params) {
    if (!rhs.empty() && rhs[0] == '$') {
        auto it = params.find(rhs);
        if (it == params.end())
            throw std::runtime_error("unbound query parameter " + rhs);
        return it->second;
    }
    return rhs;
}

bool like_match(const std::string& value, const std::string& pattern) {
    std::string re;
    for (char c : pattern) {
        if (c == '%') re += ".*";
        else if (c == '_') re += '.';
        else {
            if (std::strchr("\\^$.|?*+()[]{}", c)) re += '\\';
            re += c;
        }
    }
    return std::regex_match(value, std::regex(re));
}

bool eval_predicate(const Predicate& pred, const std::string& value, const Params& params) {
    std::string rhs = resolve_rhs(pred.rhs, params);
    if (pred.op == Predicate::Op::Like) return like_match(value, rhs);
    int cmp;
    if (is_number(value) && is_number(rhs)) {
        double a = std::stod(value), b = std::stod(rhs);
        cmp = a < b ? -1 : a > b ? 1 : 0;
    } else {
        cmp = value.compare(rhs);
    }
    switch (pred.op) {
        case Predicate::Op::Le: return cmp <= 0;
        case Predicate::Op::Lt: return cmp < 0;
        case Predicate::Op::Ge: return cmp >= 0;
        case Predicate::Op::Gt: return cmp > 0;
        case Predicate::Op::Eq: return cmp == 0;
        case Predicate::Op::Like: break;
    }
    return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lineage
// ---------------------------------------------------------------------------

Formula LineageMap::formula_for(const AnswerTuple& answer) const {
    auto it = entries.find(answer);
    if (it == entries.end()) return Formula::constant(false);
    std::vector<Formula> clause_formulas;
    for (const auto& clause : it->second) {
        if (clause.empty()) {
            clause_formulas.push_back(Formula::constant(true));
            continue;
        }
        std::vector<Formula> lits;
        for (const auto& id : clause) lits.push_back(Formula::lit(id));
        clause_formulas.push_back(lits.size() == 1 ? lits.front()
                                                   : Formula::conj(std::move(lits)));
    }
    if (clause_formulas.empty()) return Formula::constant(false);
    if (clause_formulas.size() == 1) return clause_formulas.front();
    return Formula::disj(std::move(clause_formulas));
}

LineageMap lineage(const ConjQuery& q, const TupleDB& db, const Params& params) {
    for (const auto& atom : q.atoms)
        if (!db.find(atom.relation))
            throw std::runtime_error("lineage: unknown relation " + atom.relation);

    std::map<AnswerTuple, std::set<std::vector<VarId>>> collected;
    std::map<std::string, std::string> binding;
    std::vector<VarId> clause;

    std::function<void(size_t)> recurse = [&](size_t atom_idx) {
        if (atom_idx == q.atoms.size()) {
            for (const auto& pred : q.predicates) {
                auto it = binding.find(pred.variable);
                if (it == binding.end() || !eval_predicate(pred, it->second, params)) return;
            }
            AnswerTuple answer;
            for (const auto& h : q.head_vars) answer.push_back(binding.at(h));
            std::vector<VarId> sorted_clause = clause;
            std::sort(sorted_clause.begin(), sorted_clause.end());
            collected[answer].insert(std::move(sorted_clause));
            return;
        }
        const Atom& atom = q.atoms[atom_idx];
        const Relation& rel = *db.find(atom.relation);
        if (atom.args.size() != rel.attributes.size())
            throw std::runtime_error("lineage: arity mismatch for " + atom.relation);
        for (const auto& row : rel.rows) {
            std::vector<std::string> newly_bound;
            bool ok = true;
            for (size_t i = 0; i < atom.args.size() && ok; ++i) {
                const Term& t = atom.args[i];
                if (!t.is_var) {
                    ok = row.values[i] == t.text;
                } else {
                    auto it = binding.find(t.text);
                    if (it == binding.end()) {
                        binding[t.text] = row.values[i];
                        newly_bound.push_back(t.text);
                    } else {
                        ok = it->second == row.values[i];
                    }
                }
            }
            if (ok) {
                if (!rel.deterministic) clause.push_back(row.tuple_id);
                recurse(atom_idx + 1);
                if (!rel.deterministic) clause.pop_back();
            }
            for (const auto& v : newly_bound) binding.erase(v);
        }
    };
    recurse(0);

    LineageMap out;
    for (auto& [answer, clauses] : collected)
        out.entries.emplace(answer, std::vector<std::vector<VarId>>(clauses.begin(), clauses.end()));
    return out;
}

// ---------------------------------------------------------------------------
// Plan evaluation
// ---------------------------------------------------------------------------

PlanPtr Plan::scan(std::string relation) {
    auto p = std::make_shared<Plan>();
    p->kind = Kind::Scan;
    p->relation = std::move(relation);
    return p;
}

PlanPtr Plan::join(PlanPtr l, PlanPtr r) {
    auto p = std::make_shared<Plan>();
    p->kind = Kind::Join;
    p->left = std::move(l);
    p->right = std::move(r);
    return p;
}

PlanPtr Plan::project(std::vector<std::string> keep, PlanPtr c) {
    auto p = std::make_shared<Plan>();
    p->kind = Kind::Project;
    p->keep_vars = std::move(keep);
    p->child = std::move(c);
    return p;
}

namespace {

struct EvalTable {
    std::vector<std::string> columns;
    std::vector<std::pair<std::vector<std::string>, double>> rows;
};

EvalTable eval_scan(const Plan& plan, const ConjQuery& q, const TupleDB& db,
                    const Params& params, const std::map<std::string, BoundView>& views) {
    if (auto vit = views.find(plan.relation); vit != views.end())
        return EvalTable{vit->second.columns, vit->second.rows};

    const Relation* rel = db.find(plan.relation);
    if (!rel) throw std::runtime_error("plan_eval: unknown relation " + plan.relation);
    const Atom* atom = nullptr;
    for (const auto& a : q.atoms)
        if (a.relation == plan.relation) atom = &a;
    if (!atom) throw std::runtime_error("plan_eval: no atom for relation " + plan.relation);
    if (atom->args.size() != rel->attributes.size())
        throw std::runtime_error("plan_eval: arity mismatch for " + plan.relation);

    EvalTable out;
    std::vector<size_t> var_positions;
    for (size_t i = 0; i < atom->args.size(); ++i) {
        if (!atom->args[i].is_var) continue;
        if (std::find(out.columns.begin(), out.columns.end(), atom->args[i].text) !=
            out.columns.end())
            continue;  // repeated variable: single column, equality enforced below
        out.columns.push_back(atom->args[i].text);
        var_positions.push_back(i);
    }

    for (const auto& row : rel->rows) {
        bool ok = true;
        std::map<std::string, std::string> local;
        for (size_t i = 0; i < atom->args.size() && ok; ++i) {
            const Term& t = atom->args[i];
            if (!t.is_var) {
                ok = row.values[i] == t.text;
            } else {
                auto [it, inserted] = local.emplace(t.text, row.values[i]);
                if (!inserted) ok = it->second == row.values[i];
            }
        }
        if (!ok) continue;
        for (const auto& pred : q.predicates) {
            auto it = local.find(pred.variable);
            if (it != local.end() && !eval_predicate(pred, it->second, params)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::vector<std::string> values;
        values.reserve(var_positions.size());
        for (size_t i : var_positions) values.push_back(row.values[i]);
        out.rows.emplace_back(std::move(values), rel->deterministic ? 1.0 : row.prob);
    }
    return out;
}

EvalTable eval_plan(const Plan& plan, const ConjQuery& q, const TupleDB& db,
                    const Params& params, const std::map<std::string, BoundView>& views) {
    switch (plan.kind) {
        case Plan::Kind::Scan:
            return eval_scan(plan, q, db, params, views);
        case Plan::Kind::Join: {
            EvalTable l = eval_plan(*plan.left, q, db, params, views);
            EvalTable r = eval_plan(*plan.right, q, db, params, views);
            std::vector<size_t> shared_l, shared_r, extra_r;
            for (size_t j = 0; j < r.columns.size(); ++j) {
                auto it = std::find(l.columns.begin(), l.columns.end(), r.columns[j]);
                if (it != l.columns.end()) {
                    shared_l.push_back(static_cast<size_t>(it - l.columns.begin()));
                    shared_r.push_back(j);
                } else {
                    extra_r.push_back(j);
                }
            }
            EvalTable out;
            out.columns = l.columns;
            for (size_t j : extra_r) out.columns.push_back(r.columns[j]);
            std::map<std::vector<std::string>, std::vector<size_t>> index;
            for (size_t i = 0; i < r.rows.size(); ++i) {
                std::vector<std::string> key;
                for (size_t j : shared_r) key.push_back(r.rows[i].first[j]);
                index[key].push_back(i);
            }
            for (const auto& [lvals, lprob] : l.rows) {
                std::vector<std::string> key;
                for (size_t j : shared_l) key.push_back(lvals[j]);
                auto it = index.find(key);
                if (it == index.end()) continue;
                for (size_t ri : it->second) {
                    std::vector<std::string> values = lvals;
                    for (size_t j : extra_r) values.push_back(r.rows[ri].first[j]);
                    out.rows.emplace_back(std::move(values), lprob * r.rows[ri].second);
                }
            }
            return out;
        }
        case Plan::Kind::Project: {
            EvalTable in = eval_plan(*plan.child, q, db, params, views);
            std::vector<size_t> keep;
            for (const auto& v : plan.keep_vars) {
                auto it = std::find(in.columns.begin(), in.columns.end(), v);
                if (it == in.columns.end())
                    throw std::runtime_error("plan_eval: projection variable " + v + " not available");
                keep.push_back(static_cast<size_t>(it - in.columns.begin()));
            }
            std::map<std::vector<std::string>, double> groups;  // value -> prod(1 - p)
            for (const auto& [values, prob] : in.rows) {
                std::vector<std::string> key;
                key.reserve(keep.size());
                for (size_t j : keep) key.push_back(values[j]);
                auto [it, inserted] = groups.emplace(std::move(key), 1.0);
                it->second *= 1.0 - prob;
            }
            EvalTable out;
            out.columns = plan.keep_vars;
            for (const auto& [key, miss] : groups) out.rows.emplace_back(key, 1.0 - miss);
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

std::map<AnswerTuple, double> plan_eval(const PlanPtr& plan, const ConjQuery& q,
                                        const TupleDB& db, const Params& params,
                                        const std::map<std::string, BoundView>& views) {
    if (!plan) throw std::invalid_argument("plan_eval: null plan");
    EvalTable table = eval_plan(*plan, q, db, params, views);
    std::map<AnswerTuple, double> out;
    for (const auto& [values, prob] : table.rows) out[values] = prob;
    return out;
}

// ---------------------------------------------------------------------------
// Chain plans
// ---------------------------------------------------------------------------

namespace {

std::set<std::string> atom_vars(const Atom& a) {
    std::set<std::string> out;
    for (const auto& t : a.args)
        if (t.is_var) out.insert(t.text);
    return out;
}

std::vector<std::string> ordered_union(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    for (const auto& v : b)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

}  // namespace

namespace detail {

ChainShape resolve_chain(const ConjQuery& q) {
    if (q.atoms.size() != 3)
        throw std::runtime_error("chain pattern: query must have exactly 3 atoms");
    // Find the middle atom: shares exactly one variable with each end, the
    // ends share none, and the two join variables differ.
    for (int m = 0; m < 3; ++m) {
        int e1 = (m + 1) % 3, e2 = (m + 2) % 3;
        if (e1 > e2) std::swap(e1, e2);  // keep text order for the ends
        auto vm = atom_vars(q.atoms[m]);
        auto v1 = atom_vars(q.atoms[e1]);
        auto v2 = atom_vars(q.atoms[e2]);
        std::vector<std::string> s1, s2, s12;
        std::set_intersection(vm.begin(), vm.end(), v1.begin(), v1.end(), std::back_inserter(s1));
        std::set_intersection(vm.begin(), vm.end(), v2.begin(), v2.end(), std::back_inserter(s2));
        std::set_intersection(v1.begin(), v1.end(), v2.begin(), v2.end(), std::back_inserter(s12));
        if (s1.size() == 1 && s2.size() == 1 && s1 != s2 && s12.empty())
            return ChainShape{e1, m, e2, s1.front(), s2.front()};
    }
    throw std::runtime_error("chain pattern: query does not match R(x,..), S(x,y), T(y,..)");
}

}  // namespace detail

ChainPlans chain_plans(const ConjQuery& q) {
    detail::ChainShape shape = detail::resolve_chain(q);
    const std::string& x_var = shape.x_var;
    const std::string& y_var = shape.y_var;

    const Atom& a1 = q.atoms[shape.left];
    const Atom& a2 = q.atoms[shape.middle];
    const Atom& a3 = q.atoms[shape.right];

    auto head_in = [&](const Atom& a, const Atom& b) {
        std::vector<std::string> out;
        auto va = atom_vars(a), vb = atom_vars(b);
        for (const auto& h : q.head_vars)
            if (va.count(h) || vb.count(h)) out.push_back(h);
        return out;
    };

    ChainPlans plans;
    plans.left_relation = a1.relation;
    plans.right_relation = a3.relation;

    // dissociates the left end: project over y groups duplicate uses of a1
    plans.upper_left = Plan::project(
        q.head_vars,
        Plan::join(Plan::project(ordered_union(head_in(a1, a2), {y_var}),
                                 Plan::join(Plan::scan(a1.relation), Plan::scan(a2.relation))),
                   Plan::scan(a3.relation)));
    plans.lower_left = Plan::project(
        q.head_vars,
        Plan::join(Plan::project(ordered_union(q.head_vars, {y_var}),
                                 Plan::join(Plan::scan(a1.relation), Plan::scan(a2.relation))),
                   Plan::scan(a3.relation)));

    plans.upper_right = Plan::project(
        q.head_vars,
        Plan::join(Plan::scan(a1.relation),
                   Plan::project(ordered_union(head_in(a2, a3), {x_var}),
                                 Plan::join(Plan::scan(a2.relation), Plan::scan(a3.relation)))));
    plans.lower_right = Plan::project(
        q.head_vars,
        Plan::join(Plan::scan(a1.relation),
                   Plan::project(ordered_union(q.head_vars, {x_var}),
                                 Plan::join(Plan::scan(a2.relation), Plan::scan(a3.relation)))));
    return plans;
}

// ---------------------------------------------------------------------------
// Lower-bound views and query bounds
// ---------------------------------------------------------------------------

BoundView lower_bound_view(const TupleDB& db, const ConjQuery& q,
                           const std::string& dissociated_relation, const Params& params) {
    const Relation* rel = db.find(dissociated_relation);
    if (!rel) throw std::runtime_error("lower_bound_view: unknown relation " + dissociated_relation);
    if (rel->deterministic)
        throw std::invalid_argument(
            "lower_bound_view: " + dissociated_relation +
            " is deterministic; probability-1 tuples need no rewriting");
    const Atom* atom = nullptr;
    for (const auto& a : q.atoms)
        if (a.relation == dissociated_relation) atom = &a;
    if (!atom) throw std::runtime_error("lower_bound_view: no atom for " + dissociated_relation);

    BoundView view;
    std::vector<size_t> var_positions;
    for (size_t i = 0; i < atom->args.size(); ++i) {
        if (!atom->args[i].is_var) continue;
        if (std::find(view.columns.begin(), view.columns.end(), atom->args[i].text) !=
            view.columns.end())
            continue;
        view.columns.push_back(atom->args[i].text);
        var_positions.push_back(i);
    }
    std::vector<std::string> extra_head;
    for (const auto& h : q.head_vars)
        if (std::find(view.columns.begin(), view.columns.end(), h) == view.columns.end()) {
            view.columns.push_back(h);
            extra_head.push_back(h);
        }

    std::map<VarId, const TupleRow*> by_id;
    for (const auto& row : rel->rows) by_id[row.tuple_id] = &row;

    LineageMap lin = lineage(q, db, params);
    for (const auto& [answer, clauses] : lin.entries) {
        std::map<VarId, int> occurrences;
        for (const auto& clause : clauses)
            for (const auto& id : clause)
                if (by_id.count(id)) occurrences[id]++;
        std::map<std::string, std::string> head_values;
        for (size_t i = 0; i < q.head_vars.size(); ++i) head_values[q.head_vars[i]] = answer[i];
        for (const auto& [id, d] : occurrences) {
            const TupleRow& row = *by_id.at(id);
            std::vector<std::string> values;
            for (size_t i : var_positions) values.push_back(row.values[i]);
            for (const auto& h : extra_head) values.push_back(head_values.at(h));
            double adjusted = 1.0 - std::pow(1.0 - row.prob, 1.0 / d);
            view.rows.emplace_back(std::move(values), adjusted);
        }
    }
    return view;
}

std::vector<AnswerBound> query_bounds(const ConjQuery& q, const TupleDB& db,
                                      const Params& params, int oracle_var_limit) {
    ChainPlans plans = chain_plans(q);
    auto upper_l = plan_eval(plans.upper_left, q, db, params);
    auto upper_r = plan_eval(plans.upper_right, q, db, params);
    // a deterministic end relation dissociates losslessly (copies stay at 1),
    // so the plan value is already the lower bound for that side
    auto lower_l = db.find(plans.left_relation)->deterministic
                       ? upper_l
                       : plan_eval(plans.lower_left, q, db, params,
                                   {{plans.left_relation,
                                     lower_bound_view(db, q, plans.left_relation, params)}});
    auto lower_r = db.find(plans.right_relation)->deterministic
                       ? upper_r
                       : plan_eval(plans.lower_right, q, db, params,
                                   {{plans.right_relation,
                                     lower_bound_view(db, q, plans.right_relation, params)}});

    LineageMap lin = lineage(q, db, params);
    ProbMap tuple_probs = db.tuple_probs();

    std::vector<AnswerBound> out;
    for (const auto& [answer, clauses] : lin.entries) {
        AnswerBound b;
        b.answer = answer;
        auto ul = upper_l.find(answer);
        auto ur = upper_r.find(answer);
        auto ll = lower_l.find(answer);
        auto lr = lower_r.find(answer);
        if (ul == upper_l.end() || ur == upper_r.end() || ll == lower_l.end() ||
            lr == lower_r.end())
            throw std::logic_error("query_bounds: plan results disagree on the answer set");
        if (ul->second <= ur->second) {
            b.upper = ul->second;
            b.method_upper = plans.left_relation;
        } else {
            b.upper = ur->second;
            b.method_upper = plans.right_relation;
        }
        if (ll->second >= lr->second) {
            b.lower = ll->second;
            b.method_lower = plans.left_relation;
        } else {
            b.lower = lr->second;
            b.method_lower = plans.right_relation;
        }
        Formula phi = lin.formula_for(answer);
        if (static_cast<int>(vars(phi).size()) <= oracle_var_limit)
            b.exact = shannon_prob(phi, tuple_probs);
        out.push_back(std::move(b));
    }
    std::sort(out.begin(), out.end(), [](const AnswerBound& a, const AnswerBound& b) {
        if (a.upper != b.upper) return a.upper > b.upper;
        return a.answer < b.answer;
    });
    return out;
}

std::string answer_bounds_csv(const std::vector<AnswerBound>& bounds) {
    std::ostringstream os;
    os << "answer,lower,upper,method_lower,method_upper,exact\n";
    os.precision(12);
    for (const auto& b : bounds) {
        for (size_t i = 0; i < b.answer.size(); ++i) {
            if (i) os << ';';
            os << b.answer[i];
        }
        os << ',' << b.lower << ',' << b.upper << ',' << b.method_lower << ',' << b.method_upper
           << ',';
        if (b.exact) os << *b.exact;
        os << "\n";
    }
    return os.str();
}

}  // namespace dissoc
