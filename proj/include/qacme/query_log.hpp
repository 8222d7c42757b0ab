#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qacme {

// One logged search: `timestamp,user_id,query`.
struct QueryLogRecord {
  double timestamp = 0.0;  // seconds since epoch
  std::string user;        // empty = anonymous
  std::string query;       // raw; normalized by consumers

  friend bool operator==(const QueryLogRecord&, const QueryLogRecord&) = default;
};

// Reads a delimiter-separated log with a header line. The delimiter is tab
// if the header contains one, comma otherwise. The query column is the
// remainder of the line after the second delimiter, so unquoted commas in
// queries survive; a fully double-quoted query is unquoted CSV-style.
// Throws InvalidInput (with the line number) on malformed rows or negative
// timestamps.
std::vector<QueryLogRecord> read_query_log(std::istream& in);
std::vector<QueryLogRecord> load_query_log(const std::string& path);

void write_query_log(std::ostream& out, const std::vector<QueryLogRecord>& records,
                     char delimiter = ',');

}  // namespace qacme
