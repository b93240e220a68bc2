#pragma once

#include <string>
#include <vector>

namespace silc::csv {

// Shortest round-trip decimal form; nan/inf spelled out.  Deterministic,
// locale-independent.
std::string format_double(double v);
std::string format_int(long long v);

class Writer {
  public:
    explicit Writer(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    // Writes header + rows with '\n' endings; throws on I/O failure.
    void write(const std::string& path) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // non-numeric cells parse to nan
};

Table read_numeric(const std::string& path);

}  // namespace silc::csv
