#include "foodsim/report.hpp"

#include <algorithm>
#include <cmath>

#include "foodsim/csv.hpp"
#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

namespace {

void check_series(const std::vector<std::string>& names, const std::vector<Pmf>& pmfs) {
    if (pmfs.empty()) throw EmptyInput("no distributions to report");
    if (names.size() != pmfs.size()) {
        throw ConfigError("series names and distributions differ in count");
    }
    for (const auto& pmf : pmfs) {
        if (pmf.support_max() != pmfs.front().support_max()) {
            throw SupportMismatch("report series have different supports");
        }
    }
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

std::string fixed(double value, int decimals = 1) {
    double scale = std::pow(10.0, decimals);
    double rounded = std::round(value * scale) / scale;
    std::string out = format_double(rounded);
    return out;
}

}  // namespace

std::string pmf_table_csv(const std::vector<std::string>& names, const std::vector<Pmf>& pmfs) {
    check_series(names, pmfs);
    std::string out = "k";
    for (const auto& name : names) {
        out += ',';
        out += csv_escape(name);
    }
    out += '\n';
    for (int k = 0; k <= pmfs.front().support_max(); ++k) {
        out += std::to_string(k);
        for (const auto& pmf : pmfs) {
            out += ',';
            out += format_double(pmf.at(k));
        }
        out += '\n';
    }
    return out;
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& names,
                          const std::vector<Pmf>& pmfs) {
    check_series(names, pmfs);
    const int support_max = pmfs.front().support_max();
    const int buckets = support_max + 1;
    const std::size_t series = pmfs.size();

    const double margin_left = 56.0;
    const double margin_right = 16.0;
    const double margin_top = 40.0;
    const double margin_bottom = 44.0;
    const double plot_width = 800.0;
    const double plot_height = 280.0;
    const double width = margin_left + plot_width + margin_right;
    const double height = margin_top + plot_height + margin_bottom;

    double max_mass = 0.0;
    for (const auto& pmf : pmfs) {
        for (double m : pmf.mass()) max_mass = std::max(max_mass, m);
    }
    if (max_mass <= 0.0) max_mass = 1.0;
    const double y_top = max_mass * 1.08;

    static const char* palette[] = {"#4878a8", "#e49444", "#6a9f58", "#d1605e", "#8a6fae"};
    const std::size_t palette_size = sizeof(palette) / sizeof(palette[0]);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" +
           fixed(height) + "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
           "\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + fixed(margin_left) + "\" y=\"22\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222\">" + xml_escape(title) + "</text>\n";

    // Horizontal grid lines with axis labels.
    for (int grid = 0; grid <= 4; ++grid) {
        double value = y_top * grid / 4.0;
        double y = margin_top + plot_height - plot_height * grid / 4.0;
        svg += "  <line x1=\"" + fixed(margin_left) + "\" y1=\"" + fixed(y) + "\" x2=\"" +
               fixed(margin_left + plot_width) + "\" y2=\"" + fixed(y) +
               "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        svg += "  <text x=\"" + fixed(margin_left - 6.0) + "\" y=\"" + fixed(y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" "
               "text-anchor=\"end\">" + fixed(value, 3) + "</text>\n";
    }

    const double bucket_width = plot_width / buckets;
    const double group_pad = bucket_width * 0.15;
    const double bar_width = (bucket_width - 2.0 * group_pad) / static_cast<double>(series);

    for (std::size_t s = 0; s < series; ++s) {
        const char* color = palette[s % palette_size];
        for (int k = 0; k < buckets; ++k) {
            double mass = pmfs[s].at(k);
            double bar_height = plot_height * mass / y_top;
            double x = margin_left + bucket_width * k + group_pad + bar_width * static_cast<double>(s);
            double y = margin_top + plot_height - bar_height;
            svg += "  <rect x=\"" + fixed(x, 2) + "\" y=\"" + fixed(y, 2) + "\" width=\"" +
                   fixed(bar_width, 2) + "\" height=\"" + fixed(bar_height, 2) + "\" fill=\"" +
                   color + "\"/>\n";
        }
    }

    // X axis: baseline and tick labels.
    svg += "  <line x1=\"" + fixed(margin_left) + "\" y1=\"" + fixed(margin_top + plot_height) +
           "\" x2=\"" + fixed(margin_left + plot_width) + "\" y2=\"" +
           fixed(margin_top + plot_height) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int k = 0; k < buckets; ++k) {
        double x = margin_left + bucket_width * (k + 0.5);
        svg += "  <text x=\"" + fixed(x, 2) + "\" y=\"" + fixed(margin_top + plot_height + 16.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" "
               "text-anchor=\"middle\">" + std::to_string(k) + "</text>\n";
    }
    svg += "  <text x=\"" + fixed(margin_left + plot_width / 2.0) + "\" y=\"" +
           fixed(height - 10.0) + "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\" "
           "text-anchor=\"middle\">weekly eat-out count</text>\n";

    // Legend.
    double legend_x = margin_left + 8.0;
    for (std::size_t s = 0; s < series; ++s) {
        const char* color = palette[s % palette_size];
        svg += "  <rect x=\"" + fixed(legend_x) + "\" y=\"" + fixed(margin_top - 10.0) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        svg += "  <text x=\"" + fixed(legend_x + 16.0) + "\" y=\"" + fixed(margin_top + 1.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">" +
               xml_escape(names[s]) + "</text>\n";
        legend_x += 16.0 + 8.0 * static_cast<double>(names[s].size()) + 24.0;
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace foodsim
