#pragma once

// Strict JSON accessors shared by the parsers. Errors carry a JSON pointer.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wfforge/error.hpp"

namespace wfforge::detail {

using json = nlohmann::json;

class Reader {
public:
    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ParseError(path + ": " + what);
    }

    static const json& object(const json& node, const std::string& path,
                              std::initializer_list<std::string_view> allowed) {
        if (!node.is_object()) fail(path, "expected an object");
        for (const auto& [key, value] : node.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                fail(path + "/" + key, "unknown field");
            }
        }
        return node;
    }

    static const json& member(const json& node, const std::string& path, const char* key) {
        auto it = node.find(key);
        if (it == node.end()) fail(path, std::string("missing key '") + key + "'");
        return *it;
    }

    static std::string string(const json& node, const std::string& path) {
        if (!node.is_string()) fail(path, "expected a string");
        return node.get<std::string>();
    }

    static std::uint64_t unsigned_integer(const json& node, const std::string& path) {
        if (!node.is_number_integer() || (node.is_number_integer() && !node.is_number_unsigned())) {
            fail(path, "expected a non-negative integer");
        }
        return node.get<std::uint64_t>();
    }

    static std::int64_t integer(const json& node, const std::string& path) {
        if (!node.is_number_integer()) fail(path, "expected an integer");
        if (node.is_number_unsigned()) {
            const auto v = node.get<std::uint64_t>();
            if (v > static_cast<std::uint64_t>(INT64_MAX)) fail(path, "integer out of range");
            return static_cast<std::int64_t>(v);
        }
        return node.get<std::int64_t>();
    }

    static double number(const json& node, const std::string& path) {
        if (!node.is_number()) fail(path, "expected a number");
        return node.get<double>();
    }

    static std::vector<std::string> strings(const json& node, const std::string& path) {
        if (!node.is_array()) fail(path, "expected an array");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < node.size(); ++i) {
            out.push_back(string(node[i], path + "/" + std::to_string(i)));
        }
        return out;
    }
};


} // namespace wfforge::detail
