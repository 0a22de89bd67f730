// Command-line entry point: formula bounds, query bounds with SQL emission,
// and the desk-scale experiment reproductions.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dissoc/dissociation.hpp"
#include "dissoc/exact.hpp"
#include "dissoc/experiments.hpp"
#include "dissoc/formula.hpp"
#include "dissoc/lineage.hpp"

namespace fs = std::filesystem;
using namespace dissoc;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// probs file: one "name value" pair per line, '#' starts a comment
ProbMap read_probs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ProbMap probs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name;
        double p;
        if (!(ls >> name)) continue;
        if (!(ls >> p) || p < 0.0 || p > 1.0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected \"name probability\"");
        probs[VarId(name)] = p;
    }
    return probs;
}

Params parse_params(const std::vector<std::string>& raw) {
    Params params;
    for (const auto& item : raw) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--param expects $k=value, got " + item);
        std::string key = item.substr(0, eq);
        if (key.empty() || key[0] != '$') key = "$" + key;
        params[key] = item.substr(eq + 1);
    }
    return params;
}

int cmd_bound(const std::string& formula_file, const std::string& probs_file,
              const std::string& dissociate_list, const std::string& direction_opt,
              bool no_exact, const std::string& out_dir) {
    Formula f = parse_formula(read_file(formula_file));
    ProbMap probs = read_probs(probs_file);

    std::set<VarId> xs;
    if (!dissociate_list.empty()) {
        std::istringstream ss(dissociate_list);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!name.empty()) xs.insert(VarId(name));
        }
    }

    std::optional<double> exact;
    size_t nvars = vars(f).size();
    if (!no_exact) {
        if (nvars <= 24) {
            exact = shannon_prob(f, probs);
        } else {
            std::cerr << "warning: " << nvars
                      << " variables exceed the exact-oracle limit (24); reporting bounds only\n";
        }
    }

    std::vector<Direction> directions;
    if (direction_opt == "upper") directions = {Direction::Upper};
    else if (direction_opt == "lower") directions = {Direction::Lower};
    else directions = {Direction::Upper, Direction::Lower};

    std::ostringstream csv;
    csv.precision(12);
    std::cout.precision(12);
    csv << "direction,bound,exact\n";
    for (Direction dir : directions) {
        BoundReport report = bound_pipeline(f, probs, xs, dir);
        std::cout << report.render_text();
        if (exact) std::cout << "exact: " << *exact << "\n";
        std::cout << "\n";
        csv << (dir == Direction::Upper ? "upper" : "lower") << ',' << report.bound << ',';
        if (exact) csv << *exact;
        csv << "\n";
        if (!out_dir.empty()) {
            std::string name = dir == Direction::Upper ? "bound_upper.csv" : "bound_lower.csv";
            write_file(fs::path(out_dir) / name, report.render_csv());
        }
    }
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "bound.csv", csv.str());
    return 0;
}

int cmd_query(const std::string& db_dir, const std::string& query_file,
              const std::vector<std::string>& raw_params, bool emit_sql_files,
              const std::string& out_dir) {
    TupleDB db = load_db(db_dir);
    ConjQuery q = parse_query(read_file(query_file));
    Params params = parse_params(raw_params);

    std::vector<AnswerBound> bounds = query_bounds(q, db, params);
    std::string csv = answer_bounds_csv(bounds);
    std::cout << csv;
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "answers.csv", csv);

    if (emit_sql_files) {
        fs::path sql_dir = out_dir.empty() ? fs::path("sql") : fs::path(out_dir) / "sql";
        struct {
            SqlVariant variant;
            const char* name;
        } variants[] = {{SqlVariant::UpperLeft, "upper_left.sql"},
                        {SqlVariant::UpperRight, "upper_right.sql"},
                        {SqlVariant::LowerLeft, "lower_left.sql"},
                        {SqlVariant::LowerRight, "lower_right.sql"},
                        {SqlVariant::Uda, "ior_uda.sql"}};
        for (const auto& v : variants) {
            SqlEmission emission = emit_sql(q, db, v.variant);
            std::string text = emission.view.empty()
                                   ? emission.query
                                   : emission.view + "\n" + emission.query;
            write_file(sql_dir / v.name, text);
        }
        std::cout << "SQL written to " << sql_dir.string() << "\n";
    }
    return 0;
}

int cmd_experiment(const std::string& name, double p, double q, double r, int n_max,
                   const std::string& out_dir) {
    fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::cout.precision(10);
    if (name == "ex71") {
        std::vector<double> rho_grid;
        double lo = rho_min(q);
        for (int i = 0; i <= 40; ++i) rho_grid.push_back(lo + (1.0 - lo) * i / 40.0);
        auto rows = ex71(p, q, rho_grid);
        write_file(out / "ex71.csv", ex71_csv(rows));
        std::cout << "ex71: " << rows.size() << " rows (p = " << p << ", q = " << q
                  << ", rho_min = " << lo << ") -> ex71.csv\n";
        return 0;
    }
    if (name == "ex72") {
        Ex72Result res = ex72_grid();
        write_file(out / "ex72_points.csv", ex72_points_csv(res.points));
        write_file(out / "ex72_summary.csv", grid_summary_csv(res.summaries));
        for (const auto& s : res.summaries)
            std::cout << s.method << ": avg " << s.avg_rel_err_pct << "% worst "
                      << s.worst_rel_err_pct << "% over " << s.points << " points\n";
        return 0;
    }
    if (name == "ex73") {
        Ex73Result res = ex73_grid();
        write_file(out / "ex73_summary.csv", grid_summary_csv(res.summaries));
        for (const auto& s : res.summaries)
            std::cout << s.method << ": avg " << s.avg_rel_err_pct << "% worst "
                      << s.worst_rel_err_pct << "% over " << s.points << " points\n";
        std::cout << "max |P_psi - P_phi| on the grid: " << res.max_exact_mismatch << "\n";
        return 0;
    }
    if (name == "ex74") {
        std::vector<SeriesRow> rows;
        if (r > 0.0) {
            std::vector<int> ns;
            for (int n = 1; n <= std::min(n_max, 20); ++n) ns.push_back(n);
            for (int n : {50, 100, 1000, 10000})
                if (n <= n_max) ns.push_back(n);
            rows = ex74_target(r, ns);
            std::cout << "ex74 target r = " << r << ": upper(" << rows.back().n
                      << ") = " << rows.back().upper << ", lower = " << rows.back().lower << "\n";
        } else {
            rows = ex74(p, n_max);
            std::cout << "ex74 fixed p = " << p << ": " << rows.size() << " rows\n";
        }
        write_file(out / "ex74.csv", series_csv(rows, false));
        return 0;
    }
    if (name == "ex75") {
        double rr = r > 0.0 ? r : 0.5;
        std::vector<int> ns;
        for (int n = 1; n <= std::min(n_max, 20); ++n) ns.push_back(n);
        for (int n : {50, 100, 1000, 10000})
            if (n <= n_max) ns.push_back(n);
        auto rows = ex75(rr, ns);
        write_file(out / "ex75.csv", series_csv(rows, true));
        std::cout << "ex75 r = " << rr << ": limit = " << ex75_limit(rr) << ", upper("
                  << rows.back().n << ") = " << rows.back().upper << "\n";
        return 0;
    }
    throw CLI::ValidationError("--name", "unknown experiment " + name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oblivious dissociation bounds for monotone Boolean formulas and "
                 "probabilistic queries"};
    app.require_subcommand(1);

    auto* bound = app.add_subcommand("bound", "Bound the probability of a formula");
    std::string formula_file, probs_file, dissociate_list, direction = "both", out_dir;
    bool no_exact = false;
    bound->add_option("--formula", formula_file, "Formula file")->required();
    bound->add_option("--probs", probs_file, "Per-variable probabilities file")->required();
    bound->add_option("--dissociate", dissociate_list, "Comma-separated variables to dissociate");
    bound->add_option("--direction", direction, "upper, lower or both")
        ->check(CLI::IsMember({"upper", "lower", "both"}));
    bound->add_flag("--no-exact", no_exact, "Skip the exact oracle");
    bound->add_option("--out", out_dir, "Output directory for CSV reports");

    auto* query = app.add_subcommand("query", "Bound the answers of a chain query over a CSV db");
    std::string db_dir, query_file;
    std::vector<std::string> raw_params;
    bool emit_sql_flag = false;
    std::string q_out;
    query->add_option("--db", db_dir, "Database directory (manifest.json + CSVs)")->required();
    query->add_option("--query", query_file, "Query file")->required();
    query->add_option("--param", raw_params, "Query parameter binding $k=value");
    query->add_flag("--emit-sql", emit_sql_flag, "Write the plan SQL and IOR aggregate");
    query->add_option("--out", q_out, "Output directory");

    auto* experiment = app.add_subcommand("experiment", "Reproduce a quantitative study");
    std::string exp_name;
    double exp_p = 0.1, exp_q = 0.5, exp_r = -1.0;
    int exp_nmax = 30;
    std::string exp_out;
    experiment->add_option("--name", exp_name, "ex71, ex72, ex73, ex74 or ex75")->required();
    experiment->add_option("--p", exp_p, "Variable probability (ex71, ex74)");
    experiment->add_option("--q", exp_q, "Event probability (ex71)");
    experiment->add_option("--r", exp_r, "Target exact probability (ex74, ex75)");
    experiment->add_option("--n-max", exp_nmax, "Largest instance size (ex74, ex75)");
    experiment->add_option("--out", exp_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound->parsed())
            return cmd_bound(formula_file, probs_file, dissociate_list, direction, no_exact,
                             out_dir);
        if (query->parsed())
            return cmd_query(db_dir, query_file, raw_params, emit_sql_flag, q_out);
        if (experiment->parsed())
            return cmd_experiment(exp_name, exp_p, exp_q, exp_r, exp_nmax, exp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
