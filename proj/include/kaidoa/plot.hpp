#pragma once

#include <filesystem>
#include <string>

#include "kaidoa/experiment.hpp"

namespace kaidoa {

enum class PlotKind { rmse, resolution, rmse_db_with_crb };

PlotKind plot_kind_from_string(const std::string& name);

/// Self-contained SVG figure: one polyline per estimator, plus one dashed CRB
/// polyline on the rmse_db_with_crb variant. The resolution variant fixes the
/// y axis to [0, 1].
void emit_plot(const ResultTable& table, PlotKind kind, const std::filesystem::path& path);
std::string plot_string(const ResultTable& table, PlotKind kind);

}  // namespace kaidoa
