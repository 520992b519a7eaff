#include "vibgan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace vibgan {

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : path_(path) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_, std::ios::trunc);
  out << buffer_;
}

void CsvWriter::row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += csv_number(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += fields[i];
  }
  buffer_ += '\n';
}

void dump_tensor_csv(const std::filesystem::path& path, const Tensor& t) {
  std::vector<std::string> header;
  for (int64_t d : t.shape()) header.push_back(std::to_string(d));
  CsvWriter w(path, header);
  w.row(t.flat());
}

}  // namespace vibgan
