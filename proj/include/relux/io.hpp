#pragma once

#include "relux/network.hpp"
#include "relux/pwl1d.hpp"

#include <json.hpp>

#include <string>
#include <variant>

namespace relux {

using Json = nlohmann::json;

/// A network file can hold any of the scalar modes.
using AnyNetwork = std::variant<Network<Rational>, Network<double>, Network<BigFloat>>;

Json network_to_json(const Network<Rational>& net);
Json network_to_json(const Network<double>& net);
/// Multiprecision values are written as decimal strings with a "digits" field.
Json network_to_json(const Network<BigFloat>& net);
Json network_to_json(const AnyNetwork& net);

/// Parses a network document; errors name the offending field.
AnyNetwork network_from_json(const Json& j);

Json pwl_to_json(const Pwl1D& f);
Pwl1D pwl_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Rational from a JSON string "p/q" or an exact JSON number.
Rational rational_from_json(const Json& v, const std::string& where);

}  // namespace relux
