#pragma once

// JSON model/portfolio files.
//
// {
//   "dimension": n,
//   "components": [ { "weight": b, "mean": [..], "scale": [[..], ..],
//                     "generator": { "type": "student-t" | "normal", "nu": v } } ],
//   "portfolio": { "delta": [..], "theta": t, "horizon": h }
// }
//
// Matrices are row-major lists of rows.  "theta" and "horizon" default to 0.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mixrisk/model.hpp"

namespace mixrisk {

struct ModelFile {
    MixtureModel<double> model;
    std::optional<Portfolio<double>> portfolio;
};

/// Parses the schema above.  Shape/type problems throw ValidationError
/// naming the offending field (e.g. "components[1].scale[0]").
ModelFile parse_model_file(const nlohmann::json& j);
ModelFile load_model_file(const std::filesystem::path& path);

nlohmann::json to_json(const MixtureModel<double>& model);
nlohmann::json to_json(const Portfolio<double>& p);
nlohmann::json to_json(const ModelFile& file);

}  // namespace mixrisk
