#pragma once

#include <string>
#include <string_view>

#include "relucc/compiler.hpp"
#include "relucc/cpwl.hpp"
#include "relucc/mask.hpp"
#include "relucc/relu_net.hpp"

namespace relucc {

/// Shortest decimal string that parses back to exactly the same double.
std::string dtos(double v);
double stod_exact(std::string_view s);

/// {"breakpoints":[...], "values":[...]} (tails implied by the endpoints).
std::string to_json(const CPwL& f);
CPwL cpwl_from_json(const std::string& text);

/// {"name":"...", "coefficients":[...]}.
std::string to_json(const Mask& m);
Mask mask_from_json(const std::string& text);

/// {"input_dim":d, "output_dim":k, "domain":[lo,hi], "layers":[{"weights":
/// [[...]], "bias":[...], "activation":"relu"|"identity"}]} with weight and
/// bias entries as decimal strings.  Requires uniform activations per layer
/// (lower the network first); throws otherwise.
std::string to_json(const ReluNet& net);
ReluNet net_from_json(const std::string& text);

/// Report JSON; deviations are null when the report was not produced by a
/// grid comparison (pass with_devs = false).
std::string report_json(const Report& rep, bool with_devs, int width_bound, int depth_bound,
                        CompileStage stage);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace relucc
