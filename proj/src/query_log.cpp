#include "qacme/query_log.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

std::string unquote(std::string_view field) {
  if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
    std::string out;
    field = field.substr(1, field.size() - 2);
    for (std::size_t i = 0; i < field.size(); ++i) {
      out.push_back(field[i]);
      if (field[i] == '"' && i + 1 < field.size() && field[i + 1] == '"') ++i;
    }
    return out;
  }
  return std::string(field);
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& why) {
  throw InvalidInput("query log line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::vector<QueryLogRecord> read_query_log(std::istream& in) {
  std::vector<QueryLogRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto first = line.find(delim);
    const auto second = first == std::string::npos ? first : line.find(delim, first + 1);
    if (second == std::string::npos) bad_row(line_no, "expected 3 columns");

    QueryLogRecord r;
    const std::string_view ts(line.data(), first);
    const char* end = ts.data() + ts.size();
    auto [ptr, ec] = std::from_chars(ts.data(), end, r.timestamp);
    if (ec != std::errc() || ptr != end) bad_row(line_no, "bad timestamp");
    if (!(r.timestamp >= 0.0)) bad_row(line_no, "negative timestamp");
    r.user = std::string(line, first + 1, second - first - 1);
    r.query = unquote(std::string_view(line).substr(second + 1));
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<QueryLogRecord> load_query_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open query log: " + path);
  return read_query_log(in);
}

void write_query_log(std::ostream& out, const std::vector<QueryLogRecord>& records,
                     char delimiter) {
  out << "timestamp" << delimiter << "user_id" << delimiter << "query\n";
  char buf[64];
  for (const auto& r : records) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.timestamp);
    out.write(buf, ptr - buf);
    out << delimiter << r.user << delimiter;
    if (r.query.find('"') != std::string::npos) {
      out << '"';
      for (char c : r.query) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << r.query;
    }
    out << '\n';
  }
}

}  // namespace qacme
