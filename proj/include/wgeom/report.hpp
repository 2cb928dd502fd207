#pragma once

#include <string>
#include <vector>

namespace wgeom::report {

/// 17 significant digits, '.' decimal separator.
std::string number(double v);
/// RFC-4180 quoting when the field holds a comma, quote or newline.
std::string field(const std::string& s);

/// Row-by-row CSV builder with a fixed header.
class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    Csv& row(const std::vector<std::string>& cells);
    Csv& row(const std::vector<double>& values);
    std::string str() const { return text_; }
    std::size_t columns() const { return columns_; }

private:
    std::size_t columns_ = 0;
    std::string text_;
};

/// Plain aligned table from CSV text, for terminal output.
std::string pretty_table(const std::string& csv);

} // namespace wgeom::report
