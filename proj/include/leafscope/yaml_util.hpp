#pragma once

// Small helpers for reading typed values out of YAML trees with field-path
// and line context in every error.

#include <yaml-cpp/yaml.h>

#include <array>
#include <optional>
#include <string>

#include "leafscope/error.hpp"
#include "leafscope/geom.hpp"
#include "leafscope/io.hpp"

namespace leafscope::yaml {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const YAML::Node& node, const std::string& field,
                           const std::string& msg) const {
        const auto mark = node.Mark();
        const std::size_t line = mark.is_null() ? 0 : static_cast<std::size_t>(mark.line) + 1;
        throw ParseError(source_, line, field, msg);
    }

    YAML::Node root(const std::string& text) const {
        try {
            return YAML::Load(text);
        } catch (const YAML::ParserException& e) {
            throw ParseError(source_, static_cast<std::size_t>(e.mark.line) + 1, "", e.msg);
        }
    }

    template <typename T>
    T as(const YAML::Node& node, const std::string& field) const {
        if (!node.IsScalar()) fail(node, field, "expected a scalar");
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, field, "cannot convert '" + node.Scalar() + "'");
        }
    }

    template <typename T>
    T get(const YAML::Node& map, const std::string& key, const std::string& path) const {
        const YAML::Node n = map[key];
        if (!n) fail(map, join(path, key), "missing required field");
        return as<T>(n, join(path, key));
    }

    template <typename T>
    T get_or(const YAML::Node& map, const std::string& key, const std::string& path,
             T fallback) const {
        const YAML::Node n = map[key];
        if (!n) return fallback;
        return as<T>(n, join(path, key));
    }

    template <typename T>
    std::optional<T> get_opt(const YAML::Node& map, const std::string& key,
                             const std::string& path) const {
        const YAML::Node n = map[key];
        if (!n || n.IsNull()) return std::nullopt;
        return as<T>(n, join(path, key));
    }

    template <std::size_t N>
    std::array<double, N> numbers(const YAML::Node& node, const std::string& field) const {
        if (!node.IsSequence() || node.size() != N)
            fail(node, field, "expected a list of " + std::to_string(N) + " numbers");
        std::array<double, N> out{};
        for (std::size_t i = 0; i < N; ++i)
            out[i] = as<double>(node[i], field + "[" + std::to_string(i) + "]");
        return out;
    }

    Vec3 vec3(const YAML::Node& node, const std::string& field) const {
        const auto a = numbers<3>(node, field);
        return {a[0], a[1], a[2]};
    }

    std::optional<Vec3> vec3_opt(const YAML::Node& map, const std::string& key,
                                 const std::string& path) const {
        const YAML::Node n = map[key];
        if (!n) return std::nullopt;
        return vec3(n, join(path, key));
    }

    void require_map(const YAML::Node& node, const std::string& field) const {
        if (!node.IsMap()) fail(node, field, "expected a mapping");
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    static std::string index(const std::string& path, std::size_t i) {
        return path + "[" + std::to_string(i) + "]";
    }

private:
    std::string source_;
};

inline YAML::Emitter& operator<<(YAML::Emitter& em, const Vec3& v) {
    return em << YAML::Flow << YAML::BeginSeq << v.x << v.y << v.z << YAML::EndSeq;
}

}  // namespace leafscope::yaml
