#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "specsense/cli/config.hpp"

namespace specsense::cli {

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// 12 significant digits, "%.12g". Non-finite values print as inf/-inf/nan.
std::string format_number(double v);

std::string render_csv(const Table& table);

/// Array of objects keyed by column name; doubles carry 12 significant digits
/// and non-finite values become null.
std::string render_json(const Table& table);

std::string render(const Table& table, OutputFormat format);

/// Throws specsense::Error naming the path if the file cannot be written.
void write_output(const Table& table, OutputFormat format, const std::filesystem::path& path);

}  // namespace specsense::cli
