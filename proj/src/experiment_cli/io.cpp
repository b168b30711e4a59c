#include <charconv>
#include <cmath>
#include <limits>

#include "nlslab/experiment.hpp"

namespace nlslab {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

bool needs_quotes(const std::string& f) { return f.find_first_of(",\"\r\n") != std::string::npos; }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t n = 0; n < fields.size(); ++n) {
      if (n > 0) out += ',';
      const auto& f = fields[n];
      if (!needs_quotes(f)) {
        out += f;
        continue;
      }
      out += '"';
      for (char ch : f) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    }
    out += "\r\n";
  };
  line(table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw InvalidArgument("csv row width differs from the header");
    line(r);
  }
  return out;
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string fieldbuf;
  bool quoted = false;
  bool any = false;
  for (std::size_t n = 0; n < text.size(); ++n) {
    const char ch = text[n];
    if (quoted) {
      if (ch == '"') {
        if (n + 1 < text.size() && text[n + 1] == '"') {
          fieldbuf += '"';
          ++n;
        } else {
          quoted = false;
        }
      } else {
        fieldbuf += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      record.push_back(std::move(fieldbuf));
      fieldbuf.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && n + 1 < text.size() && text[n + 1] == '\n') ++n;
      record.push_back(std::move(fieldbuf));
      fieldbuf.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      fieldbuf += ch;
      any = true;
    }
  }
  if (quoted) throw InvalidArgument("csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(fieldbuf));
    records.push_back(std::move(record));
  }
  Table t;
  if (records.empty()) throw InvalidArgument("csv: missing header row");
  t.header = std::move(records.front());
  for (std::size_t n = 1; n < records.size(); ++n) {
    if (records[n].size() != t.header.size()) throw InvalidArgument("csv: row width differs from the header");
    t.rows.push_back(std::move(records[n]));
  }
  return t;
}

json to_json(const CheckRow& row) {
  return json{{"check", row.check},
              {"tag", row.tag},
              {"target", number_or_null(row.target)},
              {"estimate", number_or_null(row.estimate)},
              {"se", number_or_null(row.se)},
              {"pass", row.pass},
              {"severity", row.soft ? "soft" : "hard"},
              {"note", row.note}};
}

CheckRow check_from_json(const json& j) {
  CheckRow r;
  r.check = j.at("check").get<std::string>();
  r.tag = j.value("tag", std::string());
  r.target = number_from(j, "target");
  r.estimate = number_from(j, "estimate");
  r.se = number_from(j, "se");
  r.pass = j.at("pass").get<bool>();
  r.soft = j.value("severity", std::string("hard")) == "soft";
  r.note = j.value("note", std::string());
  return r;
}

json to_json(const ItemResult& item) {
  json tables = json::object();
  for (const auto& [name, t] : item.tables) tables[name] = json{{"header", t.header}, {"rows", t.rows}};
  json checks = json::array();
  for (const auto& c : item.checks) checks.push_back(to_json(c));
  return json{{"id", item.id}, {"tables", tables}, {"checks", checks}, {"payload", item.payload}};
}

ItemResult item_from_json(const json& j) {
  ItemResult item;
  item.id = j.at("id").get<std::string>();
  for (const auto& [name, t] : j.at("tables").items()) {
    Table table;
    table.header = t.at("header").get<std::vector<std::string>>();
    table.rows = t.at("rows").get<std::vector<std::vector<std::string>>>();
    item.tables.emplace(name, std::move(table));
  }
  for (const auto& c : j.at("checks")) item.checks.push_back(check_from_json(c));
  item.payload = j.value("payload", json());
  return item;
}

}  // namespace nlslab
