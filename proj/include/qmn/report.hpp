#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qmn/errors.hpp"

namespace qmn::report {

/// FNV-1a of the canonical config string; recorded in every output so a run
/// is reproducible from its serialized config + seed.
inline std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// CSV with a header row and a leading comment recording the config hash.
class Csv {
 public:
  Csv(std::string path, const std::string& config,
      const std::vector<std::string>& columns)
      : path_(std::move(path)) {
    os_ << "# config=" << hash_hex(config_hash(config)) << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      os_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }

  template <class... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((os_ << (first ? "" : ",") << fmt(vals), first = false), ...);
    os_ << "\n";
  }

  void write() const {
    if (path_.empty() || path_ == "-") {
      std::fputs(os_.str().c_str(), stdout);
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + path_);
    f << os_.str();
  }

  std::string str() const { return os_.str(); }

 private:
  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  static std::string fmt(const std::string& s) { return s; }
  static std::string fmt(const char* s) { return s; }
  static std::string fmt(long v) { return std::to_string(v); }
  static std::string fmt(int v) { return std::to_string(v); }

  std::string path_;
  std::ostringstream os_;
};

/// Minimal SVG polyline plot, written without external processes.
inline void write_svg(const std::string& path, const std::vector<double>& xs,
                      const std::vector<double>& ys, const std::string& title) {
  if (xs.empty() || xs.size() != ys.size())
    throw ConfigError("write_svg: need equal nonempty x/y");
  const double W = 640, H = 400, m = 48;
  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto X = [&](double x) { return m + (x - xmin) / (xmax - xmin) * (W - 2 * m); };
  auto Y = [&](double y) { return H - m - (y - ymin) / (ymax - ymin) * (H - 2 * m); };
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open plot file " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
    << H << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
    << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>"
    << title << "</text>\n<polyline fill='none' stroke='#1f77b4' "
       "stroke-width='1.5' points='";
  for (std::size_t i = 0; i < xs.size(); ++i)
    f << X(xs[i]) << "," << Y(ys[i]) << " ";
  f << "'/>\n<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m
    << "' y2='" << H - m << "' stroke='black'/>\n<line x1='" << m << "' y1='"
    << m << "' x2='" << m << "' y2='" << H - m << "' stroke='black'/>\n</svg>\n";
}

}  // namespace qmn::report
