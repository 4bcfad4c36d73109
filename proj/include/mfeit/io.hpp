#pragma once

#include "mfeit/disentangle.hpp"
#include "mfeit/forward.hpp"
#include "mfeit/geometry.hpp"
#include "mfeit/reconstruct.hpp"
#include "mfeit/spectrum.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>

namespace mfeit::io {

using nlohmann::json;

/// Round-trip formatting used for every number written to CSV.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

/// Whole-file reads and writes; a missing file raises MissingInput.
class MissingInput : public Error {
  public:
    using Error::Error;
};
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);
json parse_json(const std::string& text, const std::string& origin);

/// Throws ValidationError naming the first key not in `allowed`.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

json to_json(const StarShape& s);
StarShape shape_from_json(const json& j);
json to_json(const DomainConfig& c);
DomainConfig domain_from_json(const json& j);
json to_json(const CurrentSpec& c);
CurrentSpec current_from_json(const json& j);
Resolution resolution_from_json(const json& j);
SpectrumOptions spectrum_options_from_json(const json& j);
json to_json(const FrequencyProfile& p);
FrequencyProfile profile_from_json(const json& j);
/// Either an explicit list or {"logspace": [lo, hi, count]} (decades).
Eigen::VectorXd omegas_from_json(const json& j);
FitOptions fit_options_from_json(const json& j);
InversionSettings inversion_from_json(const json& j);

json to_json(const RationalModel& m);
RationalModel model_from_json(const json& j);

/// Columns: omega, re_k, im_k, then re_u<i>, im_u<i> per boundary node; one row per frequency.
std::string dataset_csv(const MultiFreqData& data);
MultiFreqData parse_dataset_csv(const std::string& text);

/// Columns: theta, f, u0.
std::string cauchy_csv(const CauchyData& data);
CauchyData parse_cauchy_csv(const std::string& text);

} // namespace mfeit::io
