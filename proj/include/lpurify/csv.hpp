#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "lpurify/errors.hpp"

namespace lpurify {

// Shortest round-trip decimal form, identical across runs on one platform.
inline std::string format_float(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_float(float v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Line-oriented CSV writer. Values are pre-formatted strings; numeric
// convenience overloads use format_float so output is reproducible.
class CsvWriter {
  public:
    CsvWriter() = default;

    void comment(std::string_view text) {
        body_ += "# ";
        body_ += text;
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    const std::string& str() const { return body_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw MissingInputError("cannot open for writing: " + path);
        out.write(body_.data(), static_cast<std::streamsize>(body_.size()));
        if (!out) throw MissingInputError("short write: " + path);
    }

  private:
    std::string body_;
};

}  // namespace lpurify
