#include "mixrisk/paper_tables.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "mixrisk/errors.hpp"
#include "mixrisk/var.hpp"

namespace mixrisk {

namespace {

using Row = std::pair<double, std::vector<double>>;

const std::vector<std::pair<double, double>> kLeftPairs = {{2, 3}, {3, 4}, {4, 6},  {5, 8},
                                                           {6, 10}, {7, 15}, {8, 40}, {9, 16}};
const std::vector<std::pair<double, double>> kRightPairs = {{10, 20},  {20, 30},  {200, 300}, {250, 50},
                                                            {275, 15}, {300, 55}, {400, 10},  {1000, 5}};
const std::vector<std::pair<double, double>> kEsPairs = {{2, 3}, {3, 4}, {4, 6}, {7, 15}, {8, 40}};

const std::vector<Row> kVar1pctLeft = {
    {0.05, {4.64839, 3.78507, 3.17184, 3.91919, 2.78228, 2.62175, 2.44602, 2.59524}},
    {0.10, {4.7586, 3.82348, 3.20124, 2.94213, 2.80092, 2.64116, 2.46906, 2.60704}},
    {0.15, {4.87115, 3.86216, 3.23086, 2.9652, 2.81965, 2.6607, 2.49235, 2.61887}},
    {0.20, {4.98587, 3.9011, 3.26066, 2.98846, 2.83846, 2.68035, 2.51586, 2.63073}},
    {0.25, {5.10258, 3.94025, 3.29063, 3.01177, 2.85734, 2.70009, 2.53957, 2.64261}},
    {0.30, {5.22106, 3.97962, 3.32075, 3.03518, 2.87629, 2.71991, 2.56344, 2.65452}},
    {0.35, {5.34113, 4.01917, 3.35100, 3.05866, 2.89528, 2.7398, 2.58744, 2.66644}},
    {0.40, {5.46259, 4.05888, 3.38136, 3.08221, 2.91432, 2.75974, 2.6115, 2.67838}},
    {0.45, {5.58523, 4.09873, 3.41180, 3.10502, 2.93339, 2.77972, 2.6357, 2.69033}},
    {0.50, {5.70886, 4.13870, 3.44231, 3.12946, 2.95248, 2.79972, 2.65989, 2.70228}},
};

const std::vector<Row> kVar1pctRight = {
    {0.05, {2.53963, 2.46079, 2.33916, 2.40018, 2.58957, 2.39322, 2.7432, 3.3202}},
    {0.10, {2.55132, 2.46432, 2.33947, 2.39709, 2.57661, 2.39036, 2.72242, 3.27401}},
    {0.15, {2.56304, 2.46785, 2.33978, 2.39399, 2.56359, 2.38750, 2.7014, 3.22632}},
    {0.20, {2.5748, 2.47139, 2.3401, 2.3909, 2.55051, 2.38464, 2.68019, 3.17715}},
    {0.25, {2.58658, 2.47492, 2.34041, 2.3878, 2.53738, 2.38178, 2.6588, 3.12651}},
    {0.30, {2.59838, 2.47846, 2.34073, 2.38471, 2.52422, 2.37892, 2.63726, 3.07446}},
    {0.35, {2.6102, 2.482, 2.34104, 2.38161, 2.51102, 2.37605, 2.61559, 3.02112}},
    {0.40, {2.62204, 2.48553, 2.34136, 2.37851, 2.49779, 2.37319, 2.59382, 2.96663}},
    {0.45, {2.63389, 2.48907, 2.34167, 2.37541, 2.48455, 2.37033, 2.57198, 2.91121}},
    {0.50, {2.64574, 2.49261, 2.34199, 2.37232, 2.4713, 2.36746, 2.55009, 2.85513}},
};

const std::vector<Row> kVar01pct = {
    {0.20, {12.8878, 7.84891, 5.66393, 4.82769, 4.39245, 3.98902, 3.62286, 3.82625}},
    {0.25, {13.5577, 8.01412, 5.77451, 4.90665, 4.45334, 4.05064, 3.69896, 3.86013}},
    {0.30, {14.2205, 8.17734, 5.88317, 4.98414, 4.51241, 4.11084, 3.77242, 3.89346}},
    {0.35, {14.874, 8.33840, 5.98975, 5.06004, 4.57030, 4.16948, 3.84285, 3.92621}},
    {0.40, {15.5168, 8.49717, 6.09412, 5.13427, 4.62694, 4.22648, 3.91007, 3.95838}},
    {0.45, {16.1480, 8.65357, 6.19624, 5.20677, 4.68229, 4.28179, 3.97400, 3.98993}},
    {0.50, {16.7671, 8.80753, 6.29604, 5.27752, 4.73634, 4.33537, 3.03470, 4.02087}},
};

const std::vector<Row> kEs1pct = {
    {0.25, {6.36587, 1.29375, 0.243125, 0.00290856, 0.000681262}},
    {0.30, {7.01881, 1.41000, 0.279435, 0.00341273, 0.000793844}},
    {0.35, {7.64714, 1.52252, 0.31424, 0.00389277, 0.0008997532}},
    {0.40, {8.25196, 1.63141, 0.34759, 0.0043495, 0.000997532}},
    {0.45, {8.83444, 1.73679, 0.379538, 0.00478369, 0.00108926}},
    {0.50, {9.3957, 1.83877, 0.410131, 0.00519619, 0.00117468}},
};

const std::vector<Row> kEs01pct = {
    {0.25, {20.8961, 3.03289, 0.576689, 0.00661826, 0.00164597}},
    {0.30, {23.1642, 3.32289, 0.666054, 0.0074621, 0.00180969}},
    {0.35, {25.2707, 3.58757, 0.716427, 0.008196, 0.00194229}},
    {0.40, {27.239, 3.83719, 0.776394, 0.00883632, 0.00205071}},
    {0.45, {29.0885, 4.07077, 0.830853, 0.00939711, 0.00214048}},
    {0.50, {30.8351, 4.28993, 0.880508, 0.00989055, 0.00221577}},
};

TableSpec make_table(std::string id, TableQuantity quantity, double alpha,
                     std::vector<std::pair<double, double>> pairs, const std::vector<Row>& rows, CellStatus status) {
    TableSpec t;
    t.id = std::move(id);
    t.quantity = quantity;
    t.alpha = alpha;
    t.nu_pairs = std::move(pairs);
    for (const auto& [beta, values] : rows) {
        t.betas.push_back(beta);
        t.expected.push_back(values);
        t.status.emplace_back(values.size(), status);
    }
    return t;
}

void flag(TableSpec& t, double beta, std::pair<double, double> nus) {
    const auto r = std::find(t.betas.begin(), t.betas.end(), beta);
    const auto c = std::find(t.nu_pairs.begin(), t.nu_pairs.end(), nus);
    if (r == t.betas.end() || c == t.nu_pairs.end()) throw ValidationError("flag: no such cell in " + t.id);
    t.status[r - t.betas.begin()][c - t.nu_pairs.begin()] = CellStatus::FlaggedMisprint;
}

MixtureSpec<double> two_student_mix(double beta, double nu1, double nu2) {
    return {{beta, StudentT<double>{nu1}}, {1.0 - beta, StudentT<double>{nu2}}};
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

bool monotone(const std::vector<double>& v, bool increasing) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (increasing ? v[i] < v[i - 1] : v[i] > v[i - 1]) return false;
    return true;
}

}  // namespace

std::string to_string(CellStatus s) {
    switch (s) {
        case CellStatus::MatchRequired: return "match-required";
        case CellStatus::FlaggedMisprint: return "flagged-misprint";
        case CellStatus::NonAuthoritative: return "non-authoritative";
    }
    return "unknown";
}

void check_table_spec(const TableSpec& spec) {
    std::vector<std::string> issues;
    if (!(spec.alpha > 0.0 && spec.alpha < 0.5)) issues.push_back(spec.id + ": alpha must lie in (0, 0.5)");
    if (spec.expected.size() != spec.betas.size()) issues.push_back(spec.id + ": expected rows != betas");
    if (spec.status.size() != spec.betas.size()) issues.push_back(spec.id + ": status rows != betas");
    for (std::size_t r = 0; r < spec.expected.size(); ++r) {
        if (spec.expected[r].size() != spec.nu_pairs.size())
            issues.push_back(spec.id + ": row " + std::to_string(r) + " has " + std::to_string(spec.expected[r].size()) +
                             " cells, expected " + std::to_string(spec.nu_pairs.size()));
        if (r < spec.status.size() && spec.status[r].size() != spec.nu_pairs.size())
            issues.push_back(spec.id + ": status row " + std::to_string(r) + " has the wrong length");
    }
    for (double b : spec.betas)
        if (!(b > 0.0 && b < 1.0)) issues.push_back(spec.id + ": beta " + fmt(b) + " outside (0, 1)");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::string cell_id(const TableSpec& spec, std::size_t row, std::size_t col) {
    const auto& [n1, n2] = spec.nu_pairs[col];
    return spec.id + "/beta=" + fmt(spec.betas[row], 3) + "/nu=(" + fmt(n1) + "," + fmt(n2) + ")";
}

int TableReport::required() const {
    return int(std::count_if(cells.begin(), cells.end(),
                             [](const CellResult& c) { return c.status == CellStatus::MatchRequired; }));
}

int TableReport::required_passed() const {
    return int(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) {
        return c.status == CellStatus::MatchRequired && c.within_tolerance;
    }));
}

int TableReport::flagged() const {
    return int(std::count_if(cells.begin(), cells.end(),
                             [](const CellResult& c) { return c.status == CellStatus::FlaggedMisprint; }));
}

int TableReport::non_authoritative() const {
    return int(std::count_if(cells.begin(), cells.end(),
                             [](const CellResult& c) { return c.status == CellStatus::NonAuthoritative; }));
}

bool TableReport::ok() const { return required_passed() == required(); }

TableReport reproduce_table(const TableSpec& spec, EsConvention convention) {
    check_table_spec(spec);
    TableReport report;
    report.table_id = spec.id;
    report.alpha = spec.alpha;
    for (std::size_t r = 0; r < spec.betas.size(); ++r) {
        for (std::size_t c = 0; c < spec.nu_pairs.size(); ++c) {
            CellResult cell;
            cell.cell_id = cell_id(spec, r, c);
            cell.beta = spec.betas[r];
            cell.nu1 = spec.nu_pairs[c].first;
            cell.nu2 = spec.nu_pairs[c].second;
            cell.expected = spec.expected[r][c];
            cell.status = spec.status[r][c];
            try {
                const auto mix = two_student_mix(cell.beta, cell.nu1, cell.nu2);
                const double q = solve_quantile(mix, spec.alpha).q_alpha;
                cell.computed = spec.quantity == TableQuantity::Quantile
                                    ? q
                                    : es_coefficient(mix, q, spec.alpha, 1, EsRoute::ClosedForm, convention).value;
                cell.abs_diff = std::abs(cell.computed - cell.expected);
                cell.rel_diff = cell.abs_diff / std::abs(cell.expected);
                cell.within_tolerance = cell.abs_diff <= spec.tolerance;
            } catch (const std::exception& e) {
                cell.computed = std::numeric_limits<double>::quiet_NaN();
                cell.abs_diff = cell.rel_diff = std::numeric_limits<double>::quiet_NaN();
                cell.error = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

std::vector<std::string> monotonicity_suspects(const TableSpec& spec) {
    check_table_spec(spec);
    std::vector<std::string> out;
    for (std::size_t c = 0; c < spec.nu_pairs.size(); ++c) {
        const auto& [n1, n2] = spec.nu_pairs[c];
        if (n1 == n2) continue;
        const bool increasing = n1 < n2;
        std::vector<double> col;
        for (const auto& row : spec.expected) col.push_back(row[c]);
        if (monotone(col, increasing)) continue;
        for (std::size_t r = 0; r < col.size(); ++r) {
            std::vector<double> rest = col;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(r));
            if (monotone(rest, increasing)) out.push_back(cell_id(spec, r, c));
        }
    }
    return out;
}

TableSpec var_table_alpha_1pct() {
    std::vector<std::pair<double, double>> pairs = kLeftPairs;
    pairs.insert(pairs.end(), kRightPairs.begin(), kRightPairs.end());
    std::vector<Row> rows;
    for (std::size_t r = 0; r < kVar1pctLeft.size(); ++r) {
        auto values = kVar1pctLeft[r].second;
        values.insert(values.end(), kVar1pctRight[r].second.begin(), kVar1pctRight[r].second.end());
        rows.push_back({kVar1pctLeft[r].first, values});
    }
    auto t = make_table("var-alpha-0.01", TableQuantity::Quantile, 0.01, pairs, rows, CellStatus::MatchRequired);
    flag(t, 0.05, {5, 8});  // tabulated 3.91919 between neighbours near 2.92-2.94
    return t;
}

TableSpec var_table_alpha_01pct() {
    auto t = make_table("var-alpha-0.001", TableQuantity::Quantile, 0.001, kLeftPairs, kVar01pct,
                        CellStatus::MatchRequired);
    flag(t, 0.50, {8, 40});  // tabulated 3.03470 after 3.97400
    return t;
}

TableSpec es_table_alpha_1pct() {
    return make_table("es-alpha-0.01", TableQuantity::EsMultiplier, 0.01, kEsPairs, kEs1pct,
                      CellStatus::NonAuthoritative);
}

TableSpec es_table_alpha_01pct() {
    return make_table("es-alpha-0.001", TableQuantity::EsMultiplier, 0.001, kEsPairs, kEs01pct,
                      CellStatus::NonAuthoritative);
}

std::vector<TableSpec> builtin_tables() {
    return {var_table_alpha_1pct(), var_table_alpha_01pct(), es_table_alpha_1pct(), es_table_alpha_01pct()};
}

void write_csv(std::ostream& out, const std::vector<TableReport>& reports) {
    out << "cell_id,expected,computed,abs_diff,rel_diff,status,verdict\n";
    out << std::setprecision(10);
    for (const auto& rep : reports) {
        for (const auto& c : rep.cells) {
            std::string verdict;
            if (!c.error.empty()) verdict = "error";
            else if (c.status == CellStatus::MatchRequired) verdict = c.within_tolerance ? "pass" : "fail";
            else verdict = c.within_tolerance ? "agrees" : "differs";
            out << c.cell_id << ',' << c.expected << ',' << c.computed << ',' << c.abs_diff << ',' << c.rel_diff << ','
                << to_string(c.status) << ',' << verdict << '\n';
        }
    }
}

void write_summary(std::ostream& out, const std::vector<TableReport>& reports) {
    for (const auto& rep : reports) {
        out << rep.table_id << " (alpha=" << rep.alpha << "): ";
        if (rep.required() > 0) {
            out << rep.required_passed() << "/" << rep.required() << " match-required cells within tolerance";
        } else {
            out << "no match-required cells";
        }
        if (rep.flagged() > 0) out << ", " << rep.flagged() << " flagged misprint(s)";
        if (rep.non_authoritative() > 0) out << ", " << rep.non_authoritative() << " non-authoritative cells compared";
        out << (rep.ok() ? "  [OK]" : "  [MISMATCH]") << '\n';
        for (const auto& c : rep.cells) {
            if (!c.error.empty()) {
                out << "  error    " << c.cell_id << ": " << c.error << '\n';
            } else if (c.status == CellStatus::MatchRequired && !c.within_tolerance) {
                out << "  mismatch " << c.cell_id << ": expected " << c.expected << ", computed " << fmt(c.computed, 8)
                    << '\n';
            } else if (c.status == CellStatus::FlaggedMisprint) {
                out << "  flagged  " << c.cell_id << ": tabulated " << c.expected << ", computed " << fmt(c.computed, 8)
                    << '\n';
            }
        }
    }
}

void write_es_discrepancy_report(std::ostream& out) {
    out << std::setprecision(8);
    out << "# ES constant: literal vs. validated\n\n"
        << "The literal closed form for the Student-mixture ES multiplier is\n\n"
        << "    K_lit = (1/(alpha sqrt(pi))) sum_i beta_i Gamma((nu_i-1)/2)/Gamma(nu_i/2) nu_i^{nu_i/2} "
           "(q^2+nu_i)^{(1-nu_i)/2}\n\n"
        << "and follows from the radial ES integral with constant pi^{(n-1)/2}/(alpha Gamma((n+1)/2)).\n"
        << "The substitution u = z_1^2 + r^2 contributes du = 2 r dr, which that constant omits, so\n"
        << "K_lit is exactly twice the tail expectation E[-P&L | -P&L > VaR] / scale.\n"
        << "The engine ships K = K_lit / 2 (oracle-validated) and keeps K_lit behind the paper-literal flag.\n\n"
        << "## Single Student-t: against the textbook identity K = f_nu(q)(nu+q^2)/(alpha(nu-1))\n\n"
        << "| nu | alpha | q_alpha | K validated | K textbook | K literal | literal/validated |\n"
        << "|---:|---:|---:|---:|---:|---:|---:|\n";
    for (double nu : {3.0, 4.0, 8.0, 40.0}) {
        for (double alpha : {0.05, 0.01, 0.001}) {
            const MixtureSpec<double> mix = {{1.0, StudentT<double>{nu}}};
            const double q = solve_quantile(mix, alpha).q_alpha;
            const double k_val = es_coefficient(mix, q, alpha, 1).value;
            const double k_lit = es_coefficient(mix, q, alpha, 1, EsRoute::ClosedForm, EsConvention::PaperLiteral).value;
            const double log_f = log_gamma((nu + 1) / 2) - log_gamma(nu / 2) - 0.5 * std::log(nu * std::numbers::pi) -
                                 (nu + 1) / 2 * std::log1p(q * q / nu);
            const double k_text = std::exp(log_f) * (nu + q * q) / (alpha * (nu - 1));
            out << "| " << nu << " | " << alpha << " | " << q << " | " << k_val << " | " << k_text << " | " << k_lit
                << " | " << k_lit / k_val << " |\n";
        }
    }
    out << "\n## Reference ES tables (non-authoritative)\n\n"
        << "The tabulated values are compared with H evaluated at the solved quantile. They match neither\n"
        << "convention (for nu = (8,40) they are three orders of magnitude below any ES multiplier,\n"
        << "which must exceed the VaR quantile), so they are reported, not asserted.\n\n"
        << "| table | beta | (nu1,nu2) | q_alpha | tabulated | K validated | K literal |\n"
        << "|---|---:|---|---:|---:|---:|---:|\n";
    for (const auto& spec : {es_table_alpha_1pct(), es_table_alpha_01pct()}) {
        for (std::size_t r = 0; r < spec.betas.size(); ++r) {
            for (std::size_t c = 0; c < spec.nu_pairs.size(); ++c) {
                const auto [n1, n2] = spec.nu_pairs[c];
                const auto mix = two_student_mix(spec.betas[r], n1, n2);
                const double q = solve_quantile(mix, spec.alpha).q_alpha;
                const double k_val = es_coefficient(mix, q, spec.alpha, 1).value;
                const double k_lit =
                    es_coefficient(mix, q, spec.alpha, 1, EsRoute::ClosedForm, EsConvention::PaperLiteral).value;
                out << "| " << spec.id << " | " << spec.betas[r] << " | (" << n1 << "," << n2 << ") | " << q << " | "
                    << spec.expected[r][c] << " | " << k_val << " | " << k_lit << " |\n";
            }
        }
    }
    out << "\nMonte-Carlo confirmation of the validated constant is part of the acceptance suite "
           "(analytic ES within 3 bootstrap standard errors at N = 10^6).\n";
}

}  // namespace mixrisk
