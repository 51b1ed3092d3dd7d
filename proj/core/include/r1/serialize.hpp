#pragma once

#include <cstdint>
#include <string>

#include "r1/analysis.hpp"
#include "r1/designs.hpp"
#include "r1/ensembles.hpp"
#include "r1/linalg.hpp"

namespace r1 {

/// Thrown on malformed input files; the message names the offending field.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Matrix exchange format: {"n": int, "re": [[...]], "im": [[...]]}, row-major.
std::string matrix_to_json(const HermitianMatrix& Z);
HermitianMatrix matrix_from_json(const std::string& text);

// Design file:
// {"n": int, "t": int, "vectors": [{"re": [...], "im": [...]}, ...],
//  "weights": [...], "meta": {"seed": int, "theta_inf": float}}
std::string design_to_json(const WeightedDesign& d, std::uint64_t seed, double theta_inf);
WeightedDesign design_from_json(const std::string& text);

// Ensemble serialization mirrors the design file plus matrix_scale and field.
std::string ensemble_to_json(const MeasurementEnsemble& e);
MeasurementEnsemble ensemble_from_json(const std::string& text);

std::string check_report_to_json(const CheckReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void save_design(const WeightedDesign& d, const std::string& path, std::uint64_t seed,
                 double theta_inf);
WeightedDesign load_design(const std::string& path);

}  // namespace r1
