#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qkbench::plot {

struct Series {
    std::string name;
    std::vector<double> values;
};

/// One bar per label. Values are drawn on a linear axis starting at min(0, min value).
std::string bar_chart(const std::string &title, const std::vector<std::string> &labels,
                      const std::vector<double> &values, const std::string &y_label);

/// Bars grouped by `groups`; every series must hold one value per group.
std::string grouped_bar_chart(const std::string &title, const std::vector<std::string> &groups,
                              const std::vector<Series> &series, const std::string &y_label);

/// Polylines with markers over a shared x axis.
std::string line_chart(const std::string &title, const std::vector<double> &x,
                       const std::vector<Series> &series, const std::string &x_label,
                       const std::string &y_label);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

/// RFC 4180 quoting when the field holds a comma, quote or newline.
std::string csv_field(const std::string &s);

std::string csv_table(const std::vector<std::string> &header,
                      const std::vector<std::vector<std::string>> &rows);

void write_text(const std::filesystem::path &path, const std::string &text);

}  // namespace qkbench::plot
