#pragma once

// Reference two-component Student-mixture tables: standardized VaR quantiles
// q(beta, nu1, nu2) and ES multipliers, recomputed and diffed cell by cell.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mixrisk/es.hpp"

namespace mixrisk {

enum class CellStatus { MatchRequired, FlaggedMisprint, NonAuthoritative };

std::string to_string(CellStatus s);

enum class TableQuantity { Quantile, EsMultiplier };

struct TableSpec {
    std::string id;
    TableQuantity quantity = TableQuantity::Quantile;
    double alpha = 0.01;
    std::vector<std::pair<double, double>> nu_pairs;  // columns
    std::vector<double> betas;                        // rows; beta weights nu1
    std::vector<std::vector<double>> expected;        // [row][column]
    std::vector<std::vector<CellStatus>> status;      // [row][column]
    double tolerance = 1e-3;
};

/// Throws ValidationError when rows/columns/status are inconsistent.
void check_table_spec(const TableSpec& spec);

struct CellResult {
    std::string cell_id;
    double beta = 0.0;
    double nu1 = 0.0, nu2 = 0.0;
    double expected = 0.0;
    double computed = 0.0;  // NaN when the cell failed
    double abs_diff = 0.0;
    double rel_diff = 0.0;
    CellStatus status = CellStatus::MatchRequired;
    bool within_tolerance = false;
    std::string error;  // solver failure for this cell, if any
};

struct TableReport {
    std::string table_id;
    double alpha = 0.0;
    std::vector<CellResult> cells;

    int required() const;
    int required_passed() const;
    int flagged() const;
    int non_authoritative() const;
    /// True when every match-required cell is within tolerance.
    bool ok() const;
};

/// Recomputes every cell.  Quantile cells solve beta G_nu1(s) + (1-beta) G_nu2(s) = alpha;
/// ES cells evaluate the ES multiplier at that quantile under `convention`.
/// Per-cell failures are recorded in the cell, never thrown.
TableReport reproduce_table(const TableSpec& spec, EsConvention convention = EsConvention::OracleValidated);

/// Cells whose expected value breaks the monotone-in-beta order of its
/// column (increasing when nu1 < nu2, decreasing when nu1 > nu2) and whose
/// removal restores it.
std::vector<std::string> monotonicity_suspects(const TableSpec& spec);

std::string cell_id(const TableSpec& spec, std::size_t row, std::size_t col);

// Built-in tables.
TableSpec var_table_alpha_1pct();
TableSpec var_table_alpha_01pct();
TableSpec es_table_alpha_1pct();
TableSpec es_table_alpha_01pct();
std::vector<TableSpec> builtin_tables();

/// CSV: cell_id,expected,computed,abs_diff,rel_diff,status,verdict
void write_csv(std::ostream& out, const std::vector<TableReport>& reports);
void write_summary(std::ostream& out, const std::vector<TableReport>& reports);

/// Markdown comparison of the literal ES constant with the validated one,
/// against the textbook univariate Student ES identity and the reference ES tables.
void write_es_discrepancy_report(std::ostream& out);

}  // namespace mixrisk
