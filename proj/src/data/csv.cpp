#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cccpde/data.hpp"

namespace cccpde::data {

CsvError::CsvError(Kind kind, std::size_t line, const std::string& message)
    : std::runtime_error(message), kind_(kind), line_(line) {}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(CsvError::Kind::io, 0, "cannot open " + path.string());

  std::string text;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::vector<double> values;
  Dataset ds;
  ds.name = path.stem().string();

  while (std::getline(in, text)) {
    ++line_no;
    std::string_view line = trim(text);
    if (line.empty()) continue;
    const auto cells = split_cells(line);
    if (!have_header) {
      if (trim(cells.front()) != "label" || cells.size() < 2) {
        throw CsvError(CsvError::Kind::missing_header, line_no,
                       where(path, line_no) + "expected header 'label,f0,...'");
      }
      width = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != width) {
      throw CsvError(CsvError::Kind::ragged_row, line_no,
                     where(path, line_no) + "expected " + std::to_string(width) + " cells, found " +
                         std::to_string(cells.size()));
    }
    const std::string_view label_cell = trim(cells[0]);
    unsigned long long label = 0;
    auto [lp, lec] = std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), label);
    if (lec != std::errc() || lp != label_cell.data() + label_cell.size()) {
      throw CsvError(CsvError::Kind::non_numeric, line_no,
                     where(path, line_no) + "label '" + std::string(label_cell) +
                         "' is not a non-negative integer");
    }
    ds.labels.push_back(static_cast<Label>(label));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string_view cell = trim(cells[c]);
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty()) {
        throw CsvError(CsvError::Kind::non_numeric, line_no,
                       where(path, line_no) + "cell " + std::to_string(c + 1) + " ('" +
                           std::string(cell) + "') is not numeric");
      }
      values.push_back(v);
    }
  }
  if (line_no == 0 || !have_header) {
    throw CsvError(CsvError::Kind::empty_file, line_no, path.string() + ": file is empty");
  }
  ds.features = Matrix(ds.labels.size(), width - 1, std::move(values));
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ostringstream out;
  out << "label";
  for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double v : ds.features.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw CsvError(CsvError::Kind::io, 0, "cannot write " + path.string());
  file << out.str();
  if (!file) throw CsvError(CsvError::Kind::io, 0, "write failed for " + path.string());
}

}  // namespace cccpde::data
