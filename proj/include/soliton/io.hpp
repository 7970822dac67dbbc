#pragma once

#include "soliton/soliton_profile.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace soliton {

/// %.17g; non-finite values become "nan", "inf", "-inf".
std::string format_double(double x);

/// Reads the layout written by write_profile_csv. The t column must be a
/// uniform grid. Throws InvalidArgument on malformed input.
Profile read_profile_csv(std::istream& in, const ConeSpec& spec);

/// Pretty-printed JSON with every floating value at 17 significant digits.
/// Non-finite values are written as null.
void write_json(const nlohmann::ordered_json& value, std::ostream& out);

}  // namespace soliton
