#include "hmmdiag/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hmmdiag {

namespace {

using nlohmann::json;

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of the quoted key, or 0 when absent.
std::size_t line_of_field(std::string_view text, const std::string& field) {
  const std::string key = "\"" + field + "\"";
  const auto pos = text.find(key);
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

class Reader {
 public:
  Reader(std::string_view text, const json& doc) : text_(text), doc_(doc) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    const std::size_t line = line_of_field(text_, field);
    std::string msg = "field '" + field + "': " + what;
    if (line != 0) msg = "line " + std::to_string(line) + ": " + msg;
    throw ParseError(msg, line, field);
  }

  const json& field(const std::string& name) const {
    auto it = doc_.find(name);
    if (it == doc_.end()) fail(name, "missing required field");
    return *it;
  }

  std::size_t dimension(const std::string& name) const {
    const json& v = field(name);
    if (!v.is_number_integer()) fail(name, "expected an integer");
    if (v.is_number_unsigned()) {
      const auto n = v.get<std::uint64_t>();
      if (n > 0) return static_cast<std::size_t>(n);
    }
    fail(name, "expected a positive integer");
  }

  std::vector<double> vector(const std::string& name, const json& v,
                             std::size_t expected, const std::string& where) const {
    if (!v.is_array()) fail(name, where + " must be an array");
    if (v.size() != expected) {
      fail(name, where + " has " + std::to_string(v.size()) + " entries, expected " +
                     std::to_string(expected));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!v[j].is_number()) fail(name, where + " entry " + std::to_string(j) + " is not a number");
      out.push_back(v[j].get<double>());
    }
    return out;
  }

  Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    const json& v = field(name);
    if (!v.is_array()) fail(name, "expected an array of rows");
    if (v.size() != rows) {
      fail(name, "has " + std::to_string(v.size()) + " rows, expected " + std::to_string(rows));
    }
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = vector(name, v[i], cols, "row " + std::to_string(i));
      std::copy(row.begin(), row.end(), out.row(i).begin());
    }
    return out;
  }

 private:
  std::string_view text_;
  const json& doc_;
};

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_row(std::string& out, std::span<const double> row) {
  out += '[';
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) out += ", ";
    append_number(out, row[j]);
  }
  out += ']';
}

void append_matrix(std::string& out, const char* name, const Matrix& m) {
  out += "  \"";
  out += name;
  out += "\": [\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += "    ";
    append_row(out, m.row(i));
    out += i + 1 < m.rows() ? ",\n" : "\n";
  }
  out += "  ],\n";
}

}  // namespace

HmmModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = e.byte == 0 ? 0 : line_of_offset(text, e.byte - 1);
    throw ParseError("line " + std::to_string(line) + ": malformed JSON: " + e.what(),
                     line, "");
  }
  if (!doc.is_object()) throw ParseError("model document must be a JSON object", 1, "");

  Reader r(text, doc);
  HmmModel model;
  model.n_states = r.dimension("n_states");
  model.n_symbols = r.dimension("n_symbols");
  model.transition = r.matrix("transition", model.n_states, model.n_states);
  model.emission = r.matrix("emission", model.n_states, model.n_symbols);
  model.initial = r.vector("initial", r.field("initial"), model.n_states, "initial");
  require_valid(model);
  return model;
}

std::string serialize_model(const HmmModel& model) {
  std::string out = "{\n";
  out += "  \"n_states\": " + std::to_string(model.n_states) + ",\n";
  out += "  \"n_symbols\": " + std::to_string(model.n_symbols) + ",\n";
  append_matrix(out, "transition", model.transition);
  append_matrix(out, "emission", model.emission);
  out += "  \"initial\": ";
  append_row(out, model.initial);
  out += "\n}\n";
  return out;
}

ObservationSequence parse_observations(std::string_view text) {
  std::vector<Symbol> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else {
      std::uint32_t value = 0;
      auto res = std::from_chars(text.data() + i, text.data() + text.size(), value);
      if (res.ec != std::errc{}) {
        throw ParseError("line " + std::to_string(line) + ": expected a symbol index near '" +
                             std::string(text.substr(i, 8)) + "'",
                         line, "observations");
      }
      const std::size_t end = static_cast<std::size_t>(res.ptr - text.data());
      if (end < text.size()) {
        const char next = text[end];
        if (next != ',' && next != ' ' && next != '\t' && next != '\r' && next != '\n') {
          throw ParseError("line " + std::to_string(line) + ": unexpected character '" +
                               std::string(1, next) + "'",
                           line, "observations");
        }
      }
      out.push_back(value);
      i = end;
    }
  }
  if (out.empty()) throw ParseError("observation sequence is empty", line, "observations");
  return ObservationSequence(std::move(out));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

HmmModel read_model_file(const std::string& path) {
  return parse_model(read_text_file(path));
}

ObservationSequence read_observation_file(const std::string& path) {
  return parse_observations(read_text_file(path));
}

void write_model_file(const std::string& path, const HmmModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << serialize_model(model);
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace hmmdiag
