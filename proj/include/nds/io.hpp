#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "nds/pipeline.hpp"

namespace nds::io {

using json = nlohmann::json;

// A fully parsed problem file: reference data, frame, targets, options.
struct Problem {
    ReferenceSpectrum ref;
    EigenFrame frame;
    SpectralTarget target;
    PipelineOptions options;
};

json complex_to_json(cplx z);
cplx complex_from_json(const json& j, const std::string& field);
json matrix_to_json(const Mat& m);         // rows of [re, im] pairs
Mat matrix_from_json(const json& j, const std::string& field);
json vector_to_json(const Vec& v);
Vec vector_from_json(const json& j, const std::string& field);

json problem_to_json(const Problem& p);
Problem problem_from_json(const json& j);
Problem load_problem(const std::string& path);

json realization_to_json(const SystemRealization& sys);
SystemRealization realization_from_json(const json& j);
SystemRealization load_realization(const std::string& path);

json pipeline_diagnostics_json(const PipelineResult& result);
json verification_to_json(const VerificationReport& report);
std::string verification_to_csv(const VerificationReport& report);

json spectrum_to_json(const SpectrumResult& spectrum);
std::string spectrum_to_csv(const SpectrumResult& spectrum);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace nds::io
