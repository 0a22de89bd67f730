// SQL generation for the chain-query plans. The emitted statements run the
// probability computation inside a standard DBMS: joins multiply tuple
// probabilities, grouped IOR aggregates implement duplicate-eliminating
// projections, and the lower-bound variants rewrite the dissociated table's
// probabilities through a view.

#include <algorithm>
#include <sstream>

#include "dissoc/lineage.hpp"

namespace dissoc {

namespace {

const char* kIorAggregate =
    "create or replace function ior_sfunc(float, float) returns float as\n"
    "   'select $1 * (1.0 - $2)'\n"
    "   language SQL;\n"
    "\n"
    "create or replace function ior_finalfunc(float) returns float as\n"
    "   'select 1.0 - $1'\n"
    "   language SQL;\n"
    "\n"
    "create aggregate ior (float)(\n"
    "   sfunc = ior_sfunc,\n"
    "   stype = float,\n"
    "   finalfunc = ior_finalfunc,\n"
    "   initcond = '1.0');\n";

struct SqlAtom {
    const Atom* atom = nullptr;
    const Relation* rel = nullptr;

    const std::string& ref() const { return rel->alias.empty() ? rel->name : rel->alias; }
    std::string from_item() const {
        return rel->alias.empty() ? rel->name : rel->name + " " + rel->alias;
    }
    bool binds(const std::string& var) const {
        for (const auto& t : atom->args)
            if (t.is_var && t.text == var) return true;
        return false;
    }
    std::string attr_of(const std::string& var) const {
        for (size_t i = 0; i < atom->args.size(); ++i)
            if (atom->args[i].is_var && atom->args[i].text == var) return rel->attributes[i];
        throw std::runtime_error("emit_sql: variable " + var + " not bound by " + rel->name);
    }
};

const char* op_text(Predicate::Op op) {
    switch (op) {
        case Predicate::Op::Le: return "<=";
        case Predicate::Op::Lt: return "<";
        case Predicate::Op::Ge: return ">=";
        case Predicate::Op::Gt: return ">";
        case Predicate::Op::Eq: return "=";
        case Predicate::Op::Like: return "like";
    }
    return "=";
}

std::string pred_text(const Predicate& p, const std::string& attr) {
    return attr + " " + op_text(p.op) + " " + p.rhs;
}

// Each predicate rendered at its first binding atom in query text order,
// one "and ..." line per predicate. qualify: prefix attributes with the
// atom's table reference (used by the Boolean-query flavor).
std::string atom_order_predicates(const ConjQuery& q, const std::vector<const SqlAtom*>& order,
                                  bool qualify) {
    std::string out;
    for (const auto& p : q.predicates) {
        for (const SqlAtom* sa : order) {
            if (sa->binds(p.variable)) {
                std::string attr = sa->attr_of(p.variable);
                if (qualify) attr = sa->ref() + "." + attr;
                out += "\nand " + pred_text(p, attr);
                break;
            }
        }
    }
    return out;
}

// Predicates bound within one subquery scope, first binder in scope order.
// Each predicate is emitted once: the innermost scope that binds it marks it
// in `emitted` and later scopes skip it.
std::string scope_predicates(const ConjQuery& q, const std::vector<const SqlAtom*>& scope,
                             bool qualify, const std::string& indent,
                             std::vector<bool>& emitted) {
    std::string out;
    for (size_t i = 0; i < q.predicates.size(); ++i) {
        if (emitted[i]) continue;
        const auto& p = q.predicates[i];
        for (const SqlAtom* sa : scope) {
            if (sa->binds(p.variable)) {
                std::string attr = sa->attr_of(p.variable);
                if (qualify) attr = sa->ref() + "." + attr;
                out += "\n" + indent + "and " + pred_text(p, attr);
                emitted[i] = true;
                break;
            }
        }
    }
    return out;
}

// Boolean chain (no head vars); columns are table-qualified throughout.
std::string boolean_query(const SqlAtom& e, const SqlAtom& m, const SqlAtom& o,
                          const std::string& x_var, const std::string& y_var,
                          const ConjQuery& q, const std::string& e_name_override) {
    std::string en = e_name_override.empty() ? e.ref() : e_name_override;
    std::string e_from = e_name_override.empty() ? e.from_item() : e_name_override;
    const std::string jE = e.attr_of(x_var), jME = m.attr_of(x_var);
    const std::string jMO = m.attr_of(y_var), jO = o.attr_of(y_var);
    const std::string& mn = m.ref();
    const std::string& on = o.ref();

    std::vector<const SqlAtom*> q1_scope{&m};
    if (e_name_override.empty()) q1_scope.push_back(&e);
    std::vector<bool> emitted(q.predicates.size(), false);
    std::string preds_q1 = scope_predicates(q, q1_scope, /*qualify=*/true, "      ", emitted);
    std::string preds_q3 = scope_predicates(q, {&o}, /*qualify=*/true, "  ", emitted);

    std::ostringstream os;
    os << "select IOR(Q3.P) as P\n"
       << "from\n"
       << "  (select " << on << "." << jO << ", " << on << ".P*Q2.P as P\n"
       << "  from " << o.from_item() << ",\n"
       << "    (select Q1." << jMO << ", IOR(Q1.P) as P\n"
       << "    from (select " << mn << "." << jME << ", " << mn << "." << jMO << ", " << mn
       << ".P*" << en << ".P as P\n"
       << "      from " << e_from << ", " << m.from_item() << "\n"
       << "      where " << en << "." << jE << " = " << mn << "." << jME << preds_q1 << ") as Q1\n"
       << "    group by Q1." << jMO << ") as Q2\n"
       << "  where " << on << "." << jO << " = Q2." << jMO << preds_q3 << ") as Q3\n";
    return os.str();
}

std::string boolean_view(const SqlAtom& e, const SqlAtom& m, const SqlAtom& o,
                         const std::string& x_var, const std::string& y_var,
                         const ConjQuery& q, const std::string& view_name,
                         const std::vector<const SqlAtom*>& query_order) {
    const std::string jE = e.attr_of(x_var), jME = m.attr_of(x_var);
    const std::string jMO = m.attr_of(y_var), jO = o.attr_of(y_var);
    const std::string& en = e.ref();
    std::ostringstream os;
    os << "create view " << view_name << " as\n"
       << "select " << en << "." << jE << ",\n"
       << "  1-power(1-" << en << ".P,1e0/count(*)) as P\n"
       << "from " << e.from_item() << ", " << m.rel->name << ", " << o.rel->name << "\n"
       << "where " << en << "." << jE << "=" << m.ref() << "." << jME << "\n"
       << "and " << m.ref() << "." << jMO << "=" << o.ref() << "." << jO
       << atom_order_predicates(q, query_order, /*qualify=*/true) << "\n"
       << "group by " << en << "." << jE << ", " << en << ".P\n";
    return os.str();
}

// Answer chain (one head variable); columns unqualified except probabilities
// and subquery references, following the handwritten style of the plans.
std::string answer_query(const SqlAtom& e, const SqlAtom& m, const SqlAtom& o,
                         const std::string& x_var, const std::string& y_var,
                         const ConjQuery& q, const std::string& head,
                         const std::string& view_name) {
    bool lower = !view_name.empty();
    bool head_on_o = o.binds(head);
    const std::string jE = e.attr_of(x_var), jME = m.attr_of(x_var);
    const std::string jMO = m.attr_of(y_var), jO = o.attr_of(y_var);
    const std::string h = head_on_o ? o.attr_of(head) : e.attr_of(head);
    std::string e_ref = lower ? view_name : e.ref();
    std::string e_from = lower ? view_name : e.from_item();

    // the head attribute flows through Q1/Q2 unless the outer relation
    // supplies it; the view always carries it for per-answer copies
    bool head_inner = lower || !head_on_o;

    std::vector<const SqlAtom*> q1_scope{&m};
    if (!lower) q1_scope.push_back(&e);
    std::vector<bool> emitted(q.predicates.size(), false);
    std::string preds_q1 = scope_predicates(q, q1_scope, /*qualify=*/false, "      ", emitted);
    std::string preds_q3 = scope_predicates(q, {&o}, /*qualify=*/false, "  ", emitted);

    std::string inner_h = head_inner ? ", " + h : "";
    std::ostringstream os;
    os << "select " << h << ", IOR(Q3.P) as P\n"
       << "from\n"
       << "  (select " << (head_on_o ? o.ref() + "." + h : "Q2." + h) << ", " << o.ref()
       << ".P*Q2.P as P\n"
       << "  from " << o.from_item() << ",\n"
       << "    (select Q1." << jMO << inner_h << ", IOR(Q1.P) as P\n"
       << "    from\n"
       << "      (select " << jMO << inner_h << ", " << m.ref() << ".P*" << e_ref << ".P as P\n"
       << "      from " << m.from_item() << ", " << e_from << "\n"
       << "      where " << jME << " = " << jE << preds_q1 << ") as Q1\n"
       << "    group by Q1." << jMO << inner_h << ") as Q2\n"
       << "  where " << jO << " = Q2." << jMO << preds_q3 << ") as Q3\n"
       << "group by Q3." << h << "\n";
    return os.str();
}

std::string answer_view(const SqlAtom& e, const SqlAtom& m, const SqlAtom& o,
                        const std::string& x_var, const std::string& y_var,
                        const ConjQuery& q, const std::string& head,
                        const std::string& view_name,
                        const std::vector<const SqlAtom*>& query_order) {
    const std::string jE = e.attr_of(x_var), jME = m.attr_of(x_var);
    const std::string jMO = m.attr_of(y_var), jO = o.attr_of(y_var);
    const std::string h = o.binds(head) ? o.attr_of(head) : e.attr_of(head);
    std::ostringstream os;
    os << "create view " << view_name << " as\n"
       << "select " << jE << ", " << h << ",\n"
       << "  1-power(1-" << e.ref() << ".P,1e0/count(*)) as P\n"
       << "from " << e.from_item() << ", " << m.rel->name << ", " << o.rel->name << "\n"
       << "where " << jE << "=" << jME << "\n"
       << "and " << jMO << " = " << jO
       << atom_order_predicates(q, query_order, /*qualify=*/false) << "\n"
       << "group by " << jE << ", " << h << ", " << e.ref() << ".P\n";
    return os.str();
}

}  // namespace

SqlEmission emit_sql(const ConjQuery& q, const TupleDB& db, SqlVariant variant) {
    if (variant == SqlVariant::Uda) return SqlEmission{"", kIorAggregate};

    detail::ChainShape shape = detail::resolve_chain(q);
    auto make_sql_atom = [&](int idx) {
        SqlAtom sa;
        sa.atom = &q.atoms[idx];
        sa.rel = db.find(sa.atom->relation);
        if (!sa.rel) throw std::runtime_error("emit_sql: unknown relation " + sa.atom->relation);
        if (sa.atom->args.size() != sa.rel->attributes.size())
            throw std::runtime_error("emit_sql: arity mismatch for " + sa.atom->relation);
        return sa;
    };
    SqlAtom a1 = make_sql_atom(shape.left);
    SqlAtom a2 = make_sql_atom(shape.middle);
    SqlAtom a3 = make_sql_atom(shape.right);
    std::vector<const SqlAtom*> query_order;  // text order for view predicates
    {
        std::vector<std::pair<int, const SqlAtom*>> tagged{
            {shape.left, &a1}, {shape.middle, &a2}, {shape.right, &a3}};
        std::sort(tagged.begin(), tagged.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [_, sa] : tagged) query_order.push_back(sa);
    }

    bool left_side = variant == SqlVariant::UpperLeft || variant == SqlVariant::LowerLeft;
    bool lower = variant == SqlVariant::LowerLeft || variant == SqlVariant::LowerRight;
    const SqlAtom& e = left_side ? a1 : a3;
    const SqlAtom& o = left_side ? a3 : a1;
    const std::string& x_var = left_side ? shape.x_var : shape.y_var;
    const std::string& y_var = left_side ? shape.y_var : shape.x_var;
    std::string view_name = "V" + e.ref();

    if (q.head_vars.size() > 1)
        throw std::runtime_error("emit_sql: at most one head variable is supported");

    SqlEmission out;
    if (q.head_vars.empty()) {
        if (lower) {
            out.view = boolean_view(e, a2, o, x_var, y_var, q, view_name, query_order);
            out.query = boolean_query(e, a2, o, x_var, y_var, q, view_name);
        } else {
            out.query = boolean_query(e, a2, o, x_var, y_var, q, "");
        }
        return out;
    }

    const std::string& head = q.head_vars.front();
    if (!a1.binds(head) && !a3.binds(head))
        throw std::runtime_error("emit_sql: head variable must be bound by an end atom");
    if (lower) {
        out.view = answer_view(e, a2, o, x_var, y_var, q, head, view_name, query_order);
        out.query = answer_query(e, a2, o, x_var, y_var, q, head, view_name);
    } else {
        out.query = answer_query(e, a2, o, x_var, y_var, q, head, "");
    }
    return out;
}

}  // namespace dissoc
