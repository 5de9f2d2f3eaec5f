#include "resform/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace resform {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string table_to_csv(const Table& t) {
  std::string out;
  for (size_t c = 0; c < t.columns.size(); ++c) {
    out += t.columns[c];
    out += (c + 1 < t.columns.size()) ? ',' : '\n';
  }
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      out += (c + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::string& id_prefix) {
  std::string out = "id";
  for (int j = 0; j < m.cols(); ++j) out += "," + id_prefix + std::to_string(j);
  out += '\n';
  for (int i = 0; i < m.rows(); ++i) {
    out += id_prefix + std::to_string(i);
    for (int j = 0; j < m.cols(); ++j) out += "," + format_number(m(i, j));
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json table_json(const Table& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j;
}

}  // namespace

std::string report_to_json(const Report& r) {
  nlohmann::json j;
  j["tag"] = r.tag;
  j["config"] = nlohmann::json::parse(r.config_json.empty() ? "{}" : r.config_json);
  j["summary"] = r.summary;
  j["tables"] = nlohmann::json::array();
  for (const Table& t : r.tables) j["tables"].push_back(table_json(t));
  j["content_hash"] = content_hash(r);
  return j.dump(2);
}

Report report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Report r;
  r.tag = j.at("tag").get<std::string>();
  r.config_json = j.at("config").dump();
  r.summary = j.at("summary").get<std::map<std::string, std::string>>();
  for (const auto& tj : j.at("tables")) {
    Table t;
    t.name = tj.at("name").get<std::string>();
    t.columns = tj.at("columns").get<std::vector<std::string>>();
    t.rows = tj.at("rows").get<std::vector<std::vector<std::string>>>();
    r.tables.push_back(std::move(t));
  }
  return r;
}

namespace {

std::uint32_t rol(std::uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

}  // namespace

std::string sha1_hex(const std::string& payload) {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
  std::string msg = payload;
  std::uint64_t bits = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back('\x80');
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));

  for (size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint8_t>(msg[chunk + 4 * i]) << 24) |
             (static_cast<std::uint8_t>(msg[chunk + 4 * i + 1]) << 16) |
             (static_cast<std::uint8_t>(msg[chunk + 4 * i + 2]) << 8) |
             static_cast<std::uint8_t>(msg[chunk + 4 * i + 3]);
    }
    for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }
  char out[41];
  std::snprintf(out, sizeof out, "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3], h[4]);
  return out;
}

std::string content_hash(const Report& r) {
  nlohmann::json j;
  j["tag"] = r.tag;
  j["config"] = nlohmann::json::parse(r.config_json.empty() ? "{}" : r.config_json);
  j["summary"] = r.summary;
  j["tables"] = nlohmann::json::array();
  for (const Table& t : r.tables) j["tables"].push_back(table_json(t));
  std::string payload = j.dump();
  return sha1_hex("blob " + std::to_string(payload.size()) + '\0' + payload);
}

std::string table_to_svg(const Table& t, const std::string& x_column) {
  auto xc = std::find(t.columns.begin(), t.columns.end(), x_column);
  if (xc == t.columns.end()) throw std::invalid_argument("table_to_svg: no x column");
  size_t xi = xc - t.columns.begin();

  auto parse = [](const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0' && std::isfinite(out);
  };

  std::vector<size_t> series;
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (c == xi) continue;
    bool numeric = !t.rows.empty();
    for (const auto& row : t.rows) {
      double v;
      if (!parse(row[c], v)) {
        numeric = false;
        break;
      }
    }
    if (numeric) series.push_back(c);
  }

  const double width = 640, height = 400, pad = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& row : t.rows) {
    double x;
    if (!parse(row[xi], x)) continue;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (size_t c : series) {
      double y;
      parse(row[c], y);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin >= xmax) xmax = xmin + 1;
  if (ymin >= ymax) ymax = ymin + 1;
  auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad); };
  auto sy = [&](double y) { return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + t.name +
         "</text>\n";
  svg += "<line x1=\"" + format_number(pad) + "\" y1=\"" + format_number(height - pad) +
         "\" x2=\"" + format_number(width - pad) + "\" y2=\"" + format_number(height - pad) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_number(pad) + "\" y1=\"" + format_number(pad) + "\" x2=\"" +
         format_number(pad) + "\" y2=\"" + format_number(height - pad) +
         "\" stroke=\"black\"/>\n";
  int color = 0;
  for (size_t c : series) {
    std::string pts;
    for (const auto& row : t.rows) {
      double x, y;
      if (!parse(row[xi], x) || !parse(row[c], y)) continue;
      pts += format_number(sx(x)) + "," + format_number(sy(y)) + " ";
    }
    const char* col = palette[color % 8];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" points=\"" + pts +
           "\"/>\n";
    svg += "<text x=\"" + format_number(width - pad + 4) + "\" y=\"" +
           format_number(pad + 14.0 * color) + "\" font-size=\"10\" fill=\"" + col + "\">" +
           t.columns[c] + "</text>\n";
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> emit_report(const Report& r, const std::string& out_dir,
                                     bool csv, bool json, bool svg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("emit_report: cannot create " + out_dir);

  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& content) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p);
    if (!f) throw std::runtime_error("emit_report: cannot write " + p.string());
    f << content;
    written.push_back(p.string());
  };

  if (csv) {
    for (const Table& t : r.tables) write(r.tag + "_" + t.name + ".csv", table_to_csv(t));
  }
  if (json) write(r.tag + "_summary.json", report_to_json(r));
  if (svg) {
    for (const Table& t : r.tables) {
      for (const char* x : {"level", "time", "delta", "r"}) {
        if (std::find(t.columns.begin(), t.columns.end(), x) != t.columns.end()) {
          write(r.tag + "_" + t.name + ".svg", table_to_svg(t, x));
          break;
        }
      }
    }
  }
  return written;
}

}  // namespace resform
