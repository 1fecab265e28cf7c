#include "capfade/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "capfade/error.hpp"
#include "capfade/text.hpp"

namespace capfade {
namespace {

constexpr const char* kExpectedHeader = "cell_id,cycle,capacity_ah[,condition]";

struct Columns {
  int cell_id = -1;
  int cycle = -1;
  int capacity = -1;
  int condition = -1;
  std::size_t count = 0;
};

Columns parse_header(std::string_view line) {
  Columns cols;
  auto fields = text::split(line);
  cols.count = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string_view f = fields[i];
    // Tolerate a UTF-8 byte order mark on the first field.
    if (i == 0 && f.starts_with("\xEF\xBB\xBF")) f.remove_prefix(3);
    int idx = static_cast<int>(i);
    if (f == "cell_id") cols.cell_id = idx;
    else if (f == "cycle") cols.cycle = idx;
    else if (f == "capacity_ah") cols.capacity = idx;
    else if (f == "condition") cols.condition = idx;
    else fail(ErrorKind::Parse, "line 1: unexpected column '" + std::string(f) +
                                    "'; expected header " + kExpectedHeader);
  }
  if (cols.cell_id < 0 || cols.cycle < 0 || cols.capacity < 0) {
    fail(ErrorKind::Parse, "line 1: missing header; expected " +
                               std::string(kExpectedHeader));
  }
  return cols;
}

struct PendingCell {
  CapacityCurve curve;
  std::string condition;
  std::string problem;
  std::size_t rows = 0;
};

}  // namespace

IngestResult read_dataset_csv(std::istream& in, double nominal_capacity,
                              std::string name) {
  if (!(nominal_capacity > 0.0)) {
    fail(ErrorKind::InvalidArgument, "nominal capacity must be positive");
  }
  std::string line;
  if (!std::getline(in, line) || text::trim(line).empty()) {
    fail(ErrorKind::Parse, std::string("line 1: missing header; expected ") +
                               kExpectedHeader);
  }
  Columns cols = parse_header(text::trim(line));

  std::vector<PendingCell> cells;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = text::trim(line);
    if (row.empty()) continue;
    auto fields = text::split(row);
    auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != cols.count) {
      fail(ErrorKind::Parse, where + "expected " + std::to_string(cols.count) +
                                 " fields, found " + std::to_string(fields.size()));
    }
    std::string id(fields[cols.cell_id]);
    if (id.empty()) fail(ErrorKind::Parse, where + "empty cell_id");
    int cycle = 0;
    if (!text::parse_int(fields[cols.cycle], cycle)) {
      fail(ErrorKind::Parse, where + "cycle '" + std::string(fields[cols.cycle]) +
                                 "' is not an integer");
    }
    double capacity = 0.0;
    if (!text::parse_double(fields[cols.capacity], capacity)) {
      fail(ErrorKind::Parse, where + "capacity_ah '" +
                                 std::string(fields[cols.capacity]) + "' is not a number");
    }
    std::string condition =
        cols.condition >= 0 ? std::string(fields[cols.condition]) : std::string{};

    auto [it, inserted] = index.try_emplace(id, cells.size());
    if (inserted) {
      PendingCell cell;
      cell.curve.cell_id = id;
      cell.curve.nominal_capacity = nominal_capacity;
      cell.condition = condition;
      cells.push_back(std::move(cell));
    }
    PendingCell& cell = cells[it->second];
    if (cell.condition != condition && cell.problem.empty()) {
      cell.problem = "inconsistent condition at line " + std::to_string(line_no);
    }
    cell.curve.cycles.push_back(cycle);
    cell.curve.capacities.push_back(capacity);
    ++cell.rows;
  }

  IngestResult result;
  result.dataset.name = std::move(name);
  for (auto& cell : cells) {
    result.row_counts.emplace_back(cell.curve.cell_id, cell.rows);
    std::string problem = cell.problem;
    if (problem.empty()) {
      if (auto v = validate(cell.curve)) problem = *v;
    }
    if (!problem.empty()) {
      result.rejected.push_back({cell.curve.cell_id, problem});
      continue;
    }
    if (cols.condition >= 0) {
      result.dataset.condition_groups[cell.condition].push_back(cell.curve.cell_id);
    }
    result.dataset.curves.push_back(std::move(cell.curve));
  }
  return result;
}

IngestResult read_dataset_csv(const std::filesystem::path& path,
                              double nominal_capacity) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_dataset_csv(in, nominal_capacity, path.stem().string());
}

namespace {

void append_row(std::string& buf, const std::string& id, int cycle, double q,
                const std::string* condition) {
  char num[64];
  buf += id;
  buf += ',';
  auto r1 = std::to_chars(num, num + sizeof num, cycle);
  buf.append(num, r1.ptr);
  buf += ',';
  auto r2 = std::to_chars(num, num + sizeof num, q);
  buf.append(num, r2.ptr);
  if (condition) {
    buf += ',';
    buf += *condition;
  }
  buf += '\n';
}

void write_rows(std::ostream& out, std::span<const CapacityCurve> curves,
                const std::map<std::string, std::string>* conditions) {
  out << "cell_id,cycle,capacity_ah" << (conditions ? ",condition" : "") << '\n';
  std::string buf;
  for (const auto& c : curves) {
    const std::string* condition = nullptr;
    if (conditions) {
      auto it = conditions->find(c.cell_id);
      static const std::string empty;
      condition = it == conditions->end() ? &empty : &it->second;
    }
    buf.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      append_row(buf, c.cell_id, c.cycles[i], c.capacities[i], condition);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  if (dataset.condition_groups.empty()) {
    write_rows(out, dataset.curves, nullptr);
    return;
  }
  std::map<std::string, std::string> conditions;
  for (const auto& [condition, members] : dataset.condition_groups) {
    for (const auto& id : members) conditions[id] = condition;
  }
  write_rows(out, dataset.curves, &conditions);
}

void write_curves_csv(std::ostream& out, std::span<const CapacityCurve> curves) {
  write_rows(out, curves, nullptr);
}

}  // namespace capfade
