#include "canonical_json.hpp"

#include <cmath>
#include <cstdio>

namespace concircle {
namespace {

void emit(const nlohmann::json& j, int depth, std::string& out) {
    const std::string pad(2 * depth, ' ');
    const std::string pad_in(2 * (depth + 1), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t k = 0;
            for (const auto& [key, val] : j.items()) {
                out += pad_in;
                out += nlohmann::json(key).dump();
                out += ": ";
                emit(val, depth + 1, out);
                if (++k < j.size()) out += ',';
                out += '\n';
            }
            out += pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad_in;
                emit(j[i], depth + 1, out);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += pad + "]";
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            char buf[40];
            if (std::isfinite(v))
                std::snprintf(buf, sizeof(buf), "%.12e", v);
            else
                std::snprintf(buf, sizeof(buf), "null"); // JSON has no inf/nan
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

} // namespace

std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    emit(j, 0, out);
    out += '\n';
    return out;
}

} // namespace concircle
