// Small CSV writers with deterministic number formatting.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibgan/tensor.hpp"

namespace vibgan {

// Round-trip-exact formatting ("%.17g"); NaN renders as an empty field.
std::string csv_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header);
  ~CsvWriter();

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& fields);

 private:
  std::string buffer_;
  std::filesystem::path path_;
};

// Debug dump: header = shape extents, single row = flattened values.
void dump_tensor_csv(const std::filesystem::path& path, const Tensor& t);

}  // namespace vibgan
