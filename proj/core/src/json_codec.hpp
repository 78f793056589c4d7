#pragma once

#include <json.hpp>

#include "bdt/model.hpp"
#include "bdt/tessellation.hpp"

// JSON encodings shared by the tessellation file format and the run config.
// Infinite heights are written as null.
namespace bdt::codec {

using nlohmann::json;

json encode(const Vec& v);
Vec decode_vec(const json& j);

json encode(const ModelParams& m);
ModelParams decode_model(const json& j);

json encode(const SamplingWindow& w);
SamplingWindow decode_window(const json& j);

json encode(const StabilizationCertificate& c);
StabilizationCertificate decode_certificate(const json& j);

double decode_height(const json& j, double if_null);

}  // namespace bdt::codec
