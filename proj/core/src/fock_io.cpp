#include "opsynth/fock_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

#include "opsynth/errors.hpp"

namespace opsynth {

namespace {

double parse_double(const std::string& field, int line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    fail(ErrorKind::kValidation, "matrix CSV: bad number '" + field + "' on line " + std::to_string(line));
  }
}

int parse_index(const std::string& field, int line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    fail(ErrorKind::kValidation, "matrix CSV: bad index '" + field + "' on line " + std::to_string(line));
  }
  return value;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& entries) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index m = 0; m < entries.rows(); ++m) {
    nlohmann::json re_row = nlohmann::json::array();
    nlohmann::json im_row = nlohmann::json::array();
    for (Eigen::Index n = 0; n < entries.cols(); ++n) {
      re_row.push_back(entries(m, n).real());
      im_row.push_back(entries(m, n).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return nlohmann::json{{"cutoff", entries.rows() - 1}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& doc) {
  require(doc.is_object(), ErrorKind::kValidation, "matrix JSON: expected an object");
  for (const auto& [key, value] : doc.items()) {
    require(key == "cutoff" || key == "re" || key == "im", ErrorKind::kValidation,
            "matrix JSON: unknown key '" + key + "'");
  }
  require(doc.contains("cutoff") && doc["cutoff"].is_number_integer(), ErrorKind::kValidation,
          "matrix JSON: integer 'cutoff' required");
  const int cutoff = doc["cutoff"].get<int>();
  require(cutoff >= 0, ErrorKind::kValidation, "matrix JSON: negative cutoff");
  const int dim = cutoff + 1;
  Eigen::MatrixXcd out(dim, dim);
  for (const char* part : {"re", "im"}) {
    require(doc.contains(part) && doc[part].is_array() && static_cast<int>(doc[part].size()) == dim,
            ErrorKind::kValidation, std::string("matrix JSON: '") + part + "' must have cutoff+1 rows");
  }
  for (int m = 0; m < dim; ++m) {
    const auto& re_row = doc["re"][m];
    const auto& im_row = doc["im"][m];
    require(re_row.is_array() && im_row.is_array() && static_cast<int>(re_row.size()) == dim &&
                static_cast<int>(im_row.size()) == dim,
            ErrorKind::kValidation, "matrix JSON: ragged row " + std::to_string(m));
    for (int n = 0; n < dim; ++n) {
      // null marks an element that could not be measured.
      auto part = [&](const nlohmann::json& v) {
        if (v.is_null()) return std::nan("");
        require(v.is_number(), ErrorKind::kValidation, "matrix JSON: non-numeric entry");
        return v.get<double>();
      };
      out(m, n) = Complex(part(re_row[n]), part(im_row[n]));
    }
  }
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXcd& entries) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "m,n,re,im\n";
  for (Eigen::Index m = 0; m < entries.rows(); ++m) {
    for (Eigen::Index n = 0; n < entries.cols(); ++n) {
      out << m << ',' << n << ',' << entries(m, n).real() << ',' << entries(m, n).imag() << '\n';
    }
  }
  return out.str();
}

Eigen::MatrixXcd matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && trim(line) == "m,n,re,im", ErrorKind::kValidation,
          "matrix CSV: header must be m,n,re,im");
  struct Row {
    int m, n;
    Complex value;
  };
  std::vector<Row> rows;
  int max_index = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(trim(field));
    require(fields.size() == 4, ErrorKind::kValidation, "matrix CSV: expected 4 fields on line " + std::to_string(line_no));
    Row row{parse_index(fields[0], line_no), parse_index(fields[1], line_no),
            Complex(parse_double(fields[2], line_no), parse_double(fields[3], line_no))};
    max_index = std::max({max_index, row.m, row.n});
    rows.push_back(row);
  }
  require(max_index >= 0, ErrorKind::kValidation, "matrix CSV: no entries");
  const int dim = max_index + 1;
  require(static_cast<int>(rows.size()) == dim * dim, ErrorKind::kValidation,
          "matrix CSV: expected every (m, n) entry exactly once");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Constant(dim, dim, Complex(std::nan(""), 0.0));
  for (const auto& row : rows) {
    require(std::isnan(out(row.m, row.n).real()), ErrorKind::kValidation, "matrix CSV: duplicate entry");
    out(row.m, row.n) = row.value;
  }
  return out;
}

DensityMatrix density_from_json(const nlohmann::json& doc, double truncation_tail) {
  return DensityMatrix::from_entries(matrix_from_json(doc), truncation_tail);
}

Eigen::MatrixXcd read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kValidation, "cannot open matrix file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".csv") return matrix_from_csv(buffer.str());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kValidation, "matrix file '" + path + "': " + e.what());
  }
  return matrix_from_json(doc);
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::kValidation, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorKind::kValidation, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace opsynth
