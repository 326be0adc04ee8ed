#include "irtcal/csv_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace irtcal {

namespace {

struct Field {
  std::string text;
  std::size_t column;  // 1-based character column where the field starts
};

std::vector<Field> split_line(const std::string& line, std::size_t line_no) {
  std::vector<Field> fields;
  std::size_t pos = 0;
  while (true) {
    Field f{{}, pos + 1};
    if (pos < line.size() && line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            f.text += '"';
            pos += 2;
          } else {
            ++pos;
            closed = true;
            break;
          }
        } else {
          f.text += line[pos++];
        }
      }
      if (!closed) throw ParseError("unterminated quoted field", line_no, f.column);
      if (pos < line.size() && line[pos] != ',')
        throw ParseError("unexpected character after closing quote", line_no, pos + 1);
    } else {
      const auto end = line.find(',', pos);
      f.text = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      pos = end == std::string::npos ? line.size() : end;
    }
    fields.push_back(std::move(f));
    if (pos >= line.size()) break;
    ++pos;  // skip ','
    if (pos == line.size()) {
      fields.push_back({{}, pos + 1});
      break;
    }
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

ResponseMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> item_ids, person_ids;
  std::vector<std::int8_t> cells;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, line_no);
    if (header) {
      if (fields.size() < 3)
        throw ParseError("header needs a corner cell and at least 2 item labels", line_no, 0);
      for (std::size_t k = 1; k < fields.size(); ++k) {
        const auto label = trim(fields[k].text);
        if (label.empty()) throw ParseError("empty item label", line_no, fields[k].column);
        item_ids.push_back(label);
      }
      header = false;
      continue;
    }
    if (fields.size() != item_ids.size() + 1)
      throw ParseError("expected " + std::to_string(item_ids.size() + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no, 0);
    const auto label = trim(fields[0].text);
    if (label.empty()) throw ParseError("empty person label", line_no, fields[0].column);
    person_ids.push_back(label);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = trim(fields[k].text);
      if (v.empty())
        cells.push_back(ResponseMatrix::kMissing);
      else if (v == "0")
        cells.push_back(0);
      else if (v == "1")
        cells.push_back(1);
      else
        throw ParseError("cell must be 0, 1 or empty, found '" + v + "'", line_no,
                         fields[k].column);
    }
  }
  if (header) throw ParseError("empty input", line_no == 0 ? 1 : line_no, 0);
  const std::size_t n_persons = person_ids.size(), n_items = item_ids.size();
  try {
    return ResponseMatrix(n_persons, n_items, std::move(cells),
                          std::move(person_ids), std::move(item_ids));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), line_no, 0);
  }
}

ResponseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
  return read_matrix_csv(in);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_matrix_csv(std::ostream& out, const ResponseMatrix& matrix) {
  out << "person";
  for (const auto& id : matrix.item_ids()) out << ',' << csv_field(id);
  out << '\n';
  for (std::size_t i = 0; i < matrix.n_persons(); ++i) {
    out << csv_field(matrix.person_ids()[i]);
    for (auto c : matrix.row(i)) {
      out << ',';
      if (c != ResponseMatrix::kMissing) out << static_cast<int>(c);
    }
    out << '\n';
  }
}

}  // namespace irtcal
