// report.hpp — a small insertion-ordered JSON document builder with fixed
// number formatting (17 significant digits) so machine output is lossless
// and byte-identical for identical inputs.

#pragma once

#include "dle/linalg.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace dle {

class JsonValue {
public:
    JsonValue() : kind_(Kind::Null) {}

    static JsonValue object();
    static JsonValue array();
    static JsonValue boolean(bool value);
    static JsonValue integer(std::int64_t value);
    static JsonValue number(double value);
    static JsonValue string(std::string value);

    static JsonValue from_matrix(const Matrix& m);  // array of row arrays
    static JsonValue from_vector(const Vector& v);

    bool is_object() const { return kind_ == Kind::Object; }
    bool is_array() const { return kind_ == Kind::Array; }

    JsonValue& set(const std::string& key, JsonValue value);  // object member
    JsonValue& push(JsonValue value);                         // array element

    std::string dump() const;

private:
    enum class Kind { Null, Bool, Int, Double, String, Array, Object };

    void write(std::string& out) const;

    Kind kind_;
    bool bool_ = false;
    std::int64_t int_ = 0;
    double double_ = 0.0;
    std::string string_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> members_;
};

// %.17g with a guard against non-finite values leaking into reports.
std::string format_number(double value);

}  // namespace dle
