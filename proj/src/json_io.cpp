#include "endodiff/json_io.hpp"

#include <charconv>
#include <cstdint>

namespace endodiff {

std::string format_double(double value) {
    if (value == 0.0) return "0"; // normalize the signed zero for byte-stable output
    char buffer[40];
    const auto result =
        std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

namespace {

void dump_value(const OrderedJson& value, std::string& out, int depth) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string child_indent(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (value.type()) {
        case nlohmann::detail::value_t::object: {
            if (value.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += child_indent;
                out += OrderedJson(it.key()).dump();
                out += ": ";
                dump_value(it.value(), out, depth + 1);
            }
            out += "\n" + indent + "}";
            return;
        }
        case nlohmann::detail::value_t::array: {
            if (value.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : value) {
                if (!first) out += ",\n";
                first = false;
                out += child_indent;
                dump_value(item, out, depth + 1);
            }
            out += "\n" + indent + "]";
            return;
        }
        case nlohmann::detail::value_t::number_float:
            out += format_double(value.get<double>());
            return;
        default:
            // Strings (with escaping), integers, booleans, null.
            out += value.dump();
            return;
    }
}

} // namespace

std::string dump_json(const OrderedJson& value) {
    std::string out;
    dump_value(value, out, 0);
    out += "\n";
    return out;
}

} // namespace endodiff
