#pragma once

#include <string>
#include <vector>

#include "shearop/metrics.hpp"
#include "shearop/train.hpp"

namespace shearop {

/// SNO and FNO results on one dataset's test split.
struct DatasetComparison {
    std::string dataset;
    MetricsRecord sno;
    MetricsRecord fno;
    // one representative test frame for the error panel
    ScalarField truth;
    ScalarField sno_pred;
    ScalarField fno_pred;
    std::vector<EpochRecord> sno_curve;
    std::vector<EpochRecord> fno_curve;
};

/// Ratio SNO rel_l2 / FNO rel_l2 (1 when both are zero).
double l2_ratio(const DatasetComparison& c);

/// Writes metrics.csv, table.md, panel_<dataset>.png and loss_curves.csv
/// into `dir`. Throws StructuralError if the two records disagree on the
/// test split.
void write_comparison(const std::string& dir, const std::vector<DatasetComparison>& rows);

std::string metrics_csv(const std::vector<DatasetComparison>& rows);
std::string metrics_csv(const std::vector<MetricsRecord>& records);
std::string markdown_table(const std::vector<DatasetComparison>& rows);

/// Truth | SNO | FNO | |err SNO| | |err FNO| | |err FNO| - |err SNO|.
void write_error_panel(const std::string& path, const DatasetComparison& c);

}  // namespace shearop
