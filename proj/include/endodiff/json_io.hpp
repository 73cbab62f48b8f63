#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace endodiff {

using OrderedJson = nlohmann::ordered_json;

/// Formats a double with 17 significant digits (round-trip exact for IEEE
/// doubles), locale-independent.
std::string format_double(double value);

/// Serializes a JSON tree with keys in insertion order, two-space indent,
/// and every floating-point number printed via format_double. Golden files
/// produced with this writer are byte-stable.
std::string dump_json(const OrderedJson& value);

} // namespace endodiff
