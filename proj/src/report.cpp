#include "dle/report.hpp"

#include <cmath>
#include <cstdio>

namespace dle {

JsonValue JsonValue::object() {
    JsonValue v;
    v.kind_ = Kind::Object;
    return v;
}

JsonValue JsonValue::array() {
    JsonValue v;
    v.kind_ = Kind::Array;
    return v;
}

JsonValue JsonValue::boolean(bool value) {
    JsonValue v;
    v.kind_ = Kind::Bool;
    v.bool_ = value;
    return v;
}

JsonValue JsonValue::integer(std::int64_t value) {
    JsonValue v;
    v.kind_ = Kind::Int;
    v.int_ = value;
    return v;
}

JsonValue JsonValue::number(double value) {
    JsonValue v;
    v.kind_ = Kind::Double;
    v.double_ = value;
    return v;
}

JsonValue JsonValue::string(std::string value) {
    JsonValue v;
    v.kind_ = Kind::String;
    v.string_ = std::move(value);
    return v;
}

JsonValue JsonValue::from_matrix(const Matrix& m) {
    JsonValue rows = array();
    for (Index i = 0; i < m.rows(); ++i) {
        JsonValue row = array();
        for (Index j = 0; j < m.cols(); ++j) row.push(number(m(i, j)));
        rows.push(std::move(row));
    }
    return rows;
}

JsonValue JsonValue::from_vector(const Vector& v) {
    JsonValue items = array();
    for (Index i = 0; i < v.size(); ++i) items.push(number(v(i)));
    return items;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue value) {
    if (kind_ != Kind::Object) {
        throw ValidationError("JsonValue::set on a non-object");
    }
    members_.emplace_back(key, std::move(value));
    return *this;
}

JsonValue& JsonValue::push(JsonValue value) {
    if (kind_ != Kind::Array) {
        throw ValidationError("JsonValue::push on a non-array");
    }
    items_.push_back(std::move(value));
    return *this;
}

std::string format_number(double value) {
    if (!std::isfinite(value)) {
        throw ValidationError("format_number: non-finite value in report");
    }
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

void write_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buffer[8];
                    std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                    out += buffer;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace

void JsonValue::write(std::string& out) const {
    switch (kind_) {
        case Kind::Null:
            out += "null";
            break;
        case Kind::Bool:
            out += bool_ ? "true" : "false";
            break;
        case Kind::Int:
            out += std::to_string(int_);
            break;
        case Kind::Double:
            out += format_number(double_);
            break;
        case Kind::String:
            write_escaped(string_, out);
            break;
        case Kind::Array: {
            out += '[';
            for (std::size_t i = 0; i < items_.size(); ++i) {
                if (i > 0) out += ',';
                items_[i].write(out);
            }
            out += ']';
            break;
        }
        case Kind::Object: {
            out += '{';
            for (std::size_t i = 0; i < members_.size(); ++i) {
                if (i > 0) out += ',';
                write_escaped(members_[i].first, out);
                out += ':';
                members_[i].second.write(out);
            }
            out += '}';
            break;
        }
    }
}

std::string JsonValue::dump() const {
    std::string out;
    write(out);
    return out;
}

}  // namespace dle
