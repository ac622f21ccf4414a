#include "doa/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace doa {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError(where, "not a number: '" + s + "'");
  return v;
}

long long parse_index(const std::string& s, const std::string& where) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0) {
    throw ConfigError(where, "not a non-negative integer: '" + s + "'");
  }
  return v;
}

struct Entry {
  long long i;
  long long k;
  cplx value;
};

// Reads a 4-column CSV with the given header into (index, index, complex)
// entries and reports the extent of each index.
std::vector<Entry> read_entries(std::istream& is, const std::string& header, long long& n0, long long& n1) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv", "empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ConfigError("csv:1", "expected header '" + header + "', got '" + line + "'");
  std::vector<Entry> out;
  n0 = 0;
  n1 = 0;
  long long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::string where = "csv:" + std::to_string(lineno);
    const auto cols = split_csv_line(line);
    if (cols.size() != 4) throw ConfigError(where, "expected 4 columns");
    Entry e{parse_index(cols[0], where), parse_index(cols[1], where),
            cplx(parse_double(cols[2], where), parse_double(cols[3], where))};
    n0 = std::max(n0, e.i + 1);
    n1 = std::max(n1, e.k + 1);
    out.push_back(e);
  }
  if (out.empty()) throw ConfigError("csv", "no data rows");
  if (static_cast<long long>(out.size()) != n0 * n1) throw ConfigError("csv", "matrix entries missing or duplicated");
  return out;
}

Mat assemble(const std::vector<Entry>& entries, long long n0, long long n1) {
  Mat m(n0, n1);
  std::vector<char> seen(static_cast<std::size_t>(n0 * n1), 0);
  for (const auto& e : entries) {
    auto& flag = seen[static_cast<std::size_t>(e.i * n1 + e.k)];
    if (flag) throw ConfigError("csv", "duplicate entry (" + std::to_string(e.i) + "," + std::to_string(e.k) + ")");
    flag = 1;
    m(e.i, e.k) = e.value;
  }
  return m;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

RMat real_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty list of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  RMat m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    const auto row = number_list(j[r], rf);
    if (row.size() != cols) throw ConfigError(rf, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return m;
}

}  // namespace

void write_snapshots_csv(std::ostream& os, const SnapshotMatrix& s) {
  os << "sensor,t,re,im\n";
  for (Index w = 0; w < s.sensors(); ++w) {
    for (Index t = 0; t < s.count(); ++t) {
      os << w << ',' << t << ',' << format_double(s.data(w, t).real()) << ',' << format_double(s.data(w, t).imag())
         << '\n';
    }
  }
}

SnapshotMatrix read_snapshots_csv(std::istream& is) {
  long long n0 = 0;
  long long n1 = 0;
  const auto entries = read_entries(is, "sensor,t,re,im", n0, n1);
  return {assemble(entries, n0, n1), 0};
}

void write_covariance_csv(std::ostream& os, const Mat& m) {
  os << "row,col,re,im\n";
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      os << r << ',' << c << ',' << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag()) << '\n';
    }
  }
}

Mat read_covariance_csv(std::istream& is) {
  long long n0 = 0;
  long long n1 = 0;
  const auto entries = read_entries(is, "row,col,re,im", n0, n1);
  if (n0 != n1) throw ConfigError("csv", "covariance must be square");
  return assemble(entries, n0, n1);
}

json matrix_to_json(const Mat& m) {
  json re = json::array();
  json im = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ri = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("re")) throw ConfigError(field, "expected an object with 're' (and optional 'im')");
  const RMat re = real_matrix(j.at("re"), field + ".re");
  RMat im = RMat::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_matrix(j.at("im"), field + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols()) throw ConfigError(field + ".im", "shape differs from 're'");
  }
  Mat m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

json scenario_to_json(const Scenario& s) {
  std::vector<double> betas;
  for (Index v = 0; v < s.betas.size(); ++v) betas.push_back(rad2deg(s.betas(v)));
  std::vector<double> delta(s.noise.data(), s.noise.data() + s.noise.size());
  return {{"W", s.sensors}, {"betas_deg", betas}, {"source_cov", matrix_to_json(s.source_cov)}, {"delta", delta}};
}

Scenario scenario_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  for (const char* key : {"W", "betas_deg", "source_cov", "delta"}) {
    if (!j.contains(key)) throw ConfigError(field + "." + key, "missing");
  }
  if (!j.at("W").is_number_integer()) throw ConfigError(field + ".W", "expected an integer");
  Scenario s;
  s.sensors = j.at("W").get<Index>();
  if (s.sensors < 2) throw ConfigError(field + ".W", "need at least 2 sensors");

  const auto betas = number_list(j.at("betas_deg"), field + ".betas_deg");
  if (betas.empty()) throw ConfigError(field + ".betas_deg", "need at least one source");
  if (static_cast<Index>(betas.size()) >= s.sensors) {
    throw ConfigError(field + ".betas_deg", "number of sources must be smaller than W");
  }
  s.betas.resize(static_cast<Index>(betas.size()));
  for (std::size_t v = 0; v < betas.size(); ++v) {
    if (!(betas[v] > 0.0 && betas[v] < 180.0)) {
      throw ConfigError(field + ".betas_deg[" + std::to_string(v) + "]", "must lie in the open interval (0, 180)");
    }
    s.betas(static_cast<Index>(v)) = deg2rad(betas[v]);
  }

  s.source_cov = matrix_from_json(j.at("source_cov"), field + ".source_cov");
  if (s.source_cov.rows() != s.betas.size() || s.source_cov.cols() != s.betas.size()) {
    throw ConfigError(field + ".source_cov", "must be V x V with V = len(betas_deg)");
  }
  if (!is_hermitian(s.source_cov)) throw ConfigError(field + ".source_cov", "not Hermitian");
  if (!is_psd(s.source_cov)) throw ConfigError(field + ".source_cov", "not positive semi-definite");

  const auto delta = number_list(j.at("delta"), field + ".delta");
  if (static_cast<Index>(delta.size()) != s.sensors) throw ConfigError(field + ".delta", "length must equal W");
  s.noise.resize(s.sensors);
  for (std::size_t w = 0; w < delta.size(); ++w) {
    if (!(delta[w] > 0.0)) throw ConfigError(field + ".delta[" + std::to_string(w) + "]", "must be > 0");
    s.noise(static_cast<Index>(w)) = delta[w];
  }
  s.validate();
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace doa
