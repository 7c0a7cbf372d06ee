#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace aoimec {

// Shortest round-trip decimal form; the same bits always print the same
// bytes, which is what makes rerun CSVs byte-comparable.
std::string format_double(double v);

// Trailing moving average over the last `window` points (fewer at the start).
std::vector<double> trailing_mean(std::span<const double> xs, int window);

// Thin line-oriented writer; every number goes through format_double.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void comment(const std::string& text);  // "# text"
    void row(std::span<const std::string> cells);
    void row(std::initializer_list<std::string> cells);

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace aoimec
