#pragma once

// JSON / CSV import and export of bases, fields, noise paths, solutions and reports.

#include "mmspde/mild_solver.hpp"
#include "mmspde/noise.hpp"
#include "mmspde/regularity.hpp"
#include "mmspde/spectral_space.hpp"

#include <json.hpp>

#include <string>

namespace mmspde {

using json = nlohmann::json;

json basis_to_json(const SpectralBasis& basis);
BasisPtr basis_from_json(const json& j);
void write_basis_json(const std::string& path, const SpectralBasis& basis);

json field_to_json(const Field& f);
// Throws if the stored basis id differs from basis->id().
Field field_from_json(const json& j, BasisPtr basis);

json params_to_json(const ParamSet& p);
json noise_spec_to_json(const SeriesNoiseSpec& s);

// CSV (t, coeff_1, ..., coeff_n) plus a JSON sidecar at csv_path + ".json".
void write_noise(const std::string& csv_path, const NoisePath& z);
NoisePath read_noise(const std::string& csv_path, BasisPtr basis);

// CSV (t, coeff_1, ..., coeff_n).
void write_solution_csv(const std::string& path, const MildSolution& u);
json solution_manifest(const MildSolution& u);

json lemma_to_json(const LemmaConstants& l);
json regularity_to_json(const RegularityReport& r);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

}  // namespace mmspde
