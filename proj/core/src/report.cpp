#include "identlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "identlab/error.hpp"

namespace identlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(std::size_t v) { return std::to_string(v); }

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw Error(ErrorCode::InvalidArgument, "CsvTable: row has " + std::to_string(cells.size()) + " cells, expected " +
                                                std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char c : cells[i]) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << str();
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(std::move(cur));
    return cells;
  };
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorCode::InvalidArgument, "empty CSV " + path.string());
  CsvTable table(split(line));
  while (std::getline(f, line)) {
    if (!line.empty()) table.row(split(line));
  }
  return table;
}

namespace {

std::size_t column_index(const CsvTable& t, const std::string& name) {
  const auto& cols = t.columns();
  const auto it = std::find(cols.begin(), cols.end(), name);
  if (it == cols.end()) throw Error(ErrorCode::InvalidArgument, "plot: no column '" + name + "'");
  return static_cast<std::size_t>(it - cols.begin());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void plot_csv(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg) {
  const CsvTable table = CsvTable::read(csv);
  const std::size_t xi = column_index(table, spec.x);
  const std::size_t yi = column_index(table, spec.y);
  const std::optional<std::size_t> lo = spec.y_lo ? std::optional(column_index(table, *spec.y_lo)) : std::nullopt;
  const std::optional<std::size_t> hi = spec.y_hi ? std::optional(column_index(table, *spec.y_hi)) : std::nullopt;
  const std::optional<std::size_t> gi = spec.group ? std::optional(column_index(table, *spec.group)) : std::nullopt;

  struct Point {
    double x, y, lo, hi;
  };
  std::map<std::string, std::vector<Point>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& r : table.rows()) {
    Point p{std::stod(r[xi]), std::stod(r[yi]), 0.0, 0.0};
    if (spec.log_x) p.x = std::log10(p.x);
    p.lo = lo ? std::stod(r[*lo]) : p.y;
    p.hi = hi ? std::stod(r[*hi]) : p.y;
    series[gi ? r[*gi] : spec.y].push_back(p);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min({ymin, p.y, p.lo});
    ymax = std::max({ymax, p.y, p.hi});
  }
  if (spec.reference_y) {
    ymin = std::min(ymin, *spec.reference_y);
    ymax = std::max(ymax, *spec.reference_y);
  }
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "plot: CSV has no rows");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - (y - ymin) / (ymax - ymin) * (kH - kTop - kBottom); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(spec.title)
     << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\"" << kH - kBottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << kH - kBottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << format_number(spec.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << format_number(yv) << "</text>\n";
  }
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xml_escape(spec.x) << (spec.log_x ? " (log10)" : "") << "</text>\n";
  if (spec.reference_y) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << sy(*spec.reference_y) << "\" x2=\"" << kW - kRight << "\" y2=\""
       << sy(*spec.reference_y) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  std::size_t s = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kColors[s % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) os << sx(p.x) << ',' << sy(p.y) << ' ';
    os << "\"/>\n";
    for (const auto& p : pts) {
      if (p.hi > p.lo) {
        os << "<line x1=\"" << sx(p.x) << "\" y1=\"" << sy(p.lo) << "\" x2=\"" << sx(p.x) << "\" y2=\"" << sy(p.hi)
           << "\" stroke=\"" << color << "\"/>\n";
      }
      os << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    os << "<text x=\"" << kW - kRight - 4 << "\" y=\"" << kTop + 14 * (s + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << color << "\">" << xml_escape(name) << "</text>\n";
    ++s;
  }
  os << "</svg>\n";

  std::ofstream f(svg, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + svg.string());
  f << os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* kDigits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return "fnv1a64:" + hex64(fnv1a64(ss.str()));
}

}  // namespace identlab
