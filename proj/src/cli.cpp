#include "mixrisk/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixrisk/aggregation.hpp"
#include "mixrisk/errors.hpp"
#include "mixrisk/es.hpp"
#include "mixrisk/io.hpp"
#include "mixrisk/mc_oracle.hpp"
#include "mixrisk/paper_tables.hpp"
#include "mixrisk/var.hpp"

namespace mixrisk {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"var", "es", "quantile", "tables", "mc-check", "aggregate"};

std::vector<double> alphas_or_default(const RunConfig& c) {
    return c.alphas.empty() ? std::vector<double>{0.01} : c.alphas;
}

EsConvention convention(const RunConfig& c) {
    return c.paper_literal_es ? EsConvention::PaperLiteral : EsConvention::OracleValidated;
}

struct Loaded {
    ValidatedModel<double> model;
    Portfolio<double> portfolio;
};

Loaded load(const RunConfig& c, bool need_portfolio = true) {
    if (c.input.empty()) throw ValidationError("input: --input is required for '" + c.command + "'");
    auto file = load_model_file(c.input);
    auto model = validate(std::move(file.model));
    if (!file.portfolio) {
        if (need_portfolio) throw ValidationError("portfolio: missing from " + c.input);
        return {std::move(model), {}};
    }
    check_portfolio(*file.portfolio, model);
    return {std::move(model), std::move(*file.portfolio)};
}

bool all_student(const ValidatedModel<double>& m) {
    for (const auto& c : m.model().components)
        if (!std::holds_alternative<StudentT<double>>(c.generator)) return false;
    return true;
}

bool zero_mean(const ValidatedModel<double>& m) {
    return m.component(0).mean.cwiseAbs().maxCoeff() <= kCommonMomentTol;
}

RiskReport<double> var_for(const Loaded& l, double alpha) {
    if (!l.model.common_moments()) return var_general(l.portfolio, l.model, alpha);
    if (l.portfolio.theta_carry() != 0.0) return var_delta_theta(l.portfolio, l.model, alpha);
    auto r = var_common_moments(l.portfolio, l.model, alpha);
    if (zero_mean(l.model)) r.incremental_var = incremental_var(l.portfolio, l.model, alpha);
    return r;
}

RiskReport<double> es_for(const Loaded& l, double alpha, EsConvention conv) {
    const auto v = var_for(l, alpha);
    if (!l.model.common_moments()) return es_general_moments(l.portfolio, l.model, alpha, v, conv);
    if (l.portfolio.theta_carry() != 0.0) return es_delta_theta(l.portfolio, l.model, alpha, v, conv, EsRoute::ClosedForm);
    if (all_student(l.model)) return es_student_mixture(l.portfolio, l.model, alpha, v, conv);
    return es_generic(l.portfolio, l.model, alpha, v, conv, EsRoute::ClosedForm);
}

json report_json(const RiskReport<double>& r) {
    json j = {{"alpha", r.alpha},   {"var", r.var},       {"theta_carry", r.theta_carry},
              {"method", r.method}, {"iterations", r.iterations}};
    if (r.es) j["es"] = *r.es;
    if (r.q_alpha) j["q_alpha"] = *r.q_alpha;
    if (r.es_multiplier) j["es_multiplier"] = *r.es_multiplier;
    if (r.incremental_var) {
        json iv = json::array();
        for (Eigen::Index i = 0; i < r.incremental_var->size(); ++i) iv.push_back((*r.incremental_var)[i]);
        j["incremental_var"] = iv;
    }
    return j;
}

std::string opt(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    return os.str();
}

json envelope(const RunConfig& c) {
    return {{"command", c.command}, {"convention", kSignConvention},
            {"es_convention", to_string(convention(c))}};
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

int cmd_risk(const RunConfig& c, std::ostream& out, bool with_es) {
    const auto l = load(c);
    std::vector<RiskReport<double>> reports;
    for (double a : alphas_or_default(c)) reports.push_back(with_es ? es_for(l, a, convention(c)) : var_for(l, a));
    if (c.format == "csv") {
        out << "# " << kSignConvention << "; es convention " << to_string(convention(c)) << '\n';
        out << "alpha,var,es,q_alpha,es_multiplier,theta_carry,method\n" << std::setprecision(17);
        for (const auto& r : reports)
            out << r.alpha << ',' << r.var << ',' << opt(r.es) << ',' << opt(r.q_alpha) << ',' << opt(r.es_multiplier)
                << ',' << r.theta_carry << ',' << r.method << '\n';
        return kExitOk;
    }
    json j = envelope(c);
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(report_json(r));
    emit(out, j);
    return kExitOk;
}

int cmd_quantile(const RunConfig& c, std::ostream& out) {
    const auto l = load(c, false);
    const auto mix = mixture_spec(l.model);
    const int n = l.model.dimension();
    json rows = json::array();
    std::ostringstream csv;
    csv << "alpha,q_alpha,residual,iterations,bracket_lo,bracket_hi,es_multiplier\n" << std::setprecision(17);
    for (double a : alphas_or_default(c)) {
        const auto s = solve_quantile(mix, a, n);
        const double k = es_coefficient(mix, s.q_alpha, a, n, EsRoute::ClosedForm, convention(c)).value;
        rows.push_back({{"alpha", a},
                        {"q_alpha", s.q_alpha},
                        {"residual", s.residual},
                        {"iterations", s.iterations},
                        {"bracket", {s.lo, s.hi}},
                        {"es_multiplier", k}});
        csv << a << ',' << s.q_alpha << ',' << s.residual << ',' << s.iterations << ',' << s.lo << ',' << s.hi << ','
            << k << '\n';
    }
    if (c.format == "csv") {
        out << csv.str();
    } else {
        json j = envelope(c);
        j["quantiles"] = rows;
        emit(out, j);
    }
    return kExitOk;
}

int cmd_tables(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::vector<TableReport> reports;
    for (const auto& spec : builtin_tables()) {
        if (!c.alphas.empty()) {
            bool wanted = false;
            for (double a : c.alphas) wanted = wanted || std::abs(a - spec.alpha) < 1e-15;
            if (!wanted) continue;
        }
        reports.push_back(reproduce_table(spec, convention(c)));
    }
    if (reports.empty()) throw ValidationError("alpha: no built-in table at the requested alpha (0.01 and 0.001 exist)");
    if (!c.es_report.empty()) {
        std::ofstream f(c.es_report);
        if (!f) throw ValidationError("es-report: cannot write " + c.es_report);
        write_es_discrepancy_report(f);
    }
    write_summary(err, reports);
    if (c.format == "csv") {
        write_csv(out, reports);
    } else {
        json j = envelope(c);
        j["tables"] = json::array();
        for (const auto& r : reports) {
            json cells = json::array();
            for (const auto& cell : r.cells) {
                json e = {{"cell_id", cell.cell_id}, {"expected", cell.expected}, {"status", to_string(cell.status)},
                          {"within_tolerance", cell.within_tolerance}};
                if (cell.error.empty()) {
                    e["computed"] = cell.computed;
                    e["abs_diff"] = cell.abs_diff;
                    e["rel_diff"] = cell.rel_diff;
                } else {
                    e["error"] = cell.error;
                }
                cells.push_back(std::move(e));
            }
            j["tables"].push_back({{"table", r.table_id},
                                   {"alpha", r.alpha},
                                   {"required", r.required()},
                                   {"required_passed", r.required_passed()},
                                   {"flagged", r.flagged()},
                                   {"non_authoritative", r.non_authoritative()},
                                   {"ok", r.ok()},
                                   {"cells", cells}});
        }
        emit(out, j);
    }
    return tables_exit_code(reports);
}

int cmd_mc_check(const RunConfig& c, std::ostream& out) {
    const auto l = load(c);
    SamplerOptions opt;
    opt.threads = c.threads;
    const auto batch = sample_mixture(l.model, l.portfolio, c.draws, c.seed, opt);
    json rows = json::array();
    std::ostringstream csv;
    csv << "alpha,var_analytic,var_empirical,var_se,var_z,es_analytic,es_empirical,es_se,es_z\n"
        << std::setprecision(17);
    for (double a : alphas_or_default(c)) {
        const auto r = es_for(l, a, convention(c));
        const auto t = tail_estimate(batch, a, 200, c.seed);
        const double var_z = (r.var - t.var) / t.var_se_bootstrap;
        const double es_z = (*r.es - t.es) / t.es_se_bootstrap;
        rows.push_back({{"alpha", a},
                        {"var_analytic", r.var},
                        {"var_empirical", t.var},
                        {"var_se_bootstrap", t.var_se_bootstrap},
                        {"var_se_order_statistic", t.var_se_order_statistic},
                        {"var_z", var_z},
                        {"es_analytic", *r.es},
                        {"es_empirical", t.es},
                        {"es_se_bootstrap", t.es_se_bootstrap},
                        {"es_z", es_z},
                        {"within_3se", std::abs(var_z) <= 3.0 && std::abs(es_z) <= 3.0}});
        csv << a << ',' << r.var << ',' << t.var << ',' << t.var_se_bootstrap << ',' << var_z << ',' << *r.es << ','
            << t.es << ',' << t.es_se_bootstrap << ',' << es_z << '\n';
    }
    if (c.format == "csv") {
        out << csv.str();
    } else {
        json j = envelope(c);
        j["draws"] = c.draws;
        j["seed"] = c.seed;
        j["model_hash"] = batch.model_hash;
        j["checks"] = rows;
        emit(out, j);
    }
    return kExitOk;
}

int cmd_aggregate(const RunConfig& c, std::ostream& out) {
    const auto l = load(c);
    json rows = json::array();
    std::ostringstream csv;
    csv << "alpha,var1,var2,phi,var_aggregated,var_direct,es1,es2,es_aggregated,es_direct\n" << std::setprecision(17);
    for (double a : alphas_or_default(c)) {
        const auto r = aggregate_blocks(l.portfolio, l.model, a, c.split, convention(c));
        rows.push_back({{"alpha", a},
                        {"q_alpha", r.q_alpha},
                        {"es_multiplier", r.es_multiplier},
                        {"cross", r.cross},
                        {"phi", r.phi},
                        {"var1", r.var1},
                        {"var2", r.var2},
                        {"var_aggregated", r.var_aggregated},
                        {"var_direct", r.var_direct},
                        {"es1", r.es1},
                        {"es2", r.es2},
                        {"es_aggregated", r.es_aggregated},
                        {"es_direct", r.es_direct}});
        csv << a << ',' << r.var1 << ',' << r.var2 << ',' << r.phi << ',' << r.var_aggregated << ',' << r.var_direct
            << ',' << r.es1 << ',' << r.es2 << ',' << r.es_aggregated << ',' << r.es_direct << '\n';
    }
    if (c.format == "csv") {
        out << csv.str();
    } else {
        json j = envelope(c);
        j["split"] = c.split;
        j["aggregations"] = rows;
        emit(out, j);
    }
    return kExitOk;
}

}  // namespace

int tables_exit_code(const std::vector<TableReport>& reports) {
    for (const auto& r : reports)
        if (!r.ok()) return kExitTableMismatch;
    return kExitOk;
}

void check_config(const RunConfig& c) {
    std::vector<std::string> issues;
    if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
        issues.push_back("command: unknown '" + c.command + "'");
    for (double a : c.alphas)
        if (!(a > 0.0 && a < 0.5)) issues.push_back("alpha: " + std::to_string(a) + " outside (0, 0.5)");
    if (c.format != "json" && c.format != "csv") issues.push_back("format: expected json or csv, got '" + c.format + "'");
    if (c.command == "mc-check" && c.draws < 10'000)
        issues.push_back("draws: must be >= 10000 for mc-check, got " + std::to_string(c.draws));
    if (c.command == "aggregate" && c.split <= 0) issues.push_back("split: --split is required for aggregate");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        check_config(config);
        if (config.command == "var") return cmd_risk(config, out, false);
        if (config.command == "es") return cmd_risk(config, out, true);
        if (config.command == "quantile") return cmd_quantile(config, out);
        if (config.command == "tables") return cmd_tables(config, out, err);
        if (config.command == "mc-check") return cmd_mc_check(config, out);
        return cmd_aggregate(config, out);
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return kExitConvergence;
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analytic VaR / ES for mixtures of elliptic distributions"};
    app.require_subcommand(1, 1);
    RunConfig config;
    for (const auto& name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("-i,--input", config.input, "model/portfolio JSON file");
        sub->add_option("-a,--alpha", config.alphas, "tail probabilities in (0, 0.5)")->delimiter(',');
        sub->add_option("--format", config.format, "json or csv");
        sub->add_flag("--paper-literal-es", config.paper_literal_es, "use the literal ES constant (2x)");
        if (name == "mc-check") {
            sub->add_option("--seed", config.seed, "RNG seed");
            sub->add_option("--draws", config.draws, "number of draws (>= 10000)");
            sub->add_option("--threads", config.threads, "worker threads (0: MIXRISK_THREADS / hardware)");
        }
        if (name == "aggregate") sub->add_option("--split", config.split, "first position index of market 2");
        if (name == "tables") sub->add_option("--es-report", config.es_report, "write the ES discrepancy report");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitValidation;
    }
    config.command = app.get_subcommands().front()->get_name();
    return run(config, out, err);
}

}  // namespace mixrisk
