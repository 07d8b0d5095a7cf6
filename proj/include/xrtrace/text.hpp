#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text and file helpers shared by the CSV readers and the CLI.
namespace xrtrace {

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;

/// Splits one CSV line on commas. Quoting is not supported; none of the
/// toolkit's schemas carry commas inside fields.
[[nodiscard]] std::vector<std::string_view> split_csv(std::string_view line);

/// Iterates over lines, stripping a trailing CR from each.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::optional<std::string_view> next();
    /// 1-based number of the line last returned by next().
    [[nodiscard]] std::size_t line_number() const noexcept { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

/// Parses one floating-point field; throws Error{ParseError} naming the line.
[[nodiscard]] double parse_double(std::string_view field, std::size_t line, std::string_view column);

[[nodiscard]] std::string read_text_file(const std::string& path);
[[nodiscard]] std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

/// Shortest round-trippable decimal text for a double.
[[nodiscard]] std::string format_double(double v);

}  // namespace xrtrace
