#include "tsfeat/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace tsfeat::svg {

using nlohmann::json;

namespace {

// Colorblind-safe qualitative palette (Okabe-Ito).
constexpr const char* kPalette[] = {"#0072B2", "#E69F00", "#009E73", "#CC79A7", "#56B4E9", "#D55E00", "#F0E442", "#000000"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

double value_or_nan(const json& v) { return v.is_number() ? v.get<double>() : std::nan(""); }

// Sequential blue ramp for t in [0, 1]; grey for missing values.
std::string ramp(double t) {
    if (!std::isfinite(t)) return "#cccccc";
    t = std::clamp(t, 0.0, 1.0);
    const auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(247, 8), mix(251, 48), mix(255, 107));
    return buf;
}

class Doc {
public:
    Doc(double w, double h) : w_(w), h_(h) {}

    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& title = {}) {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" fill=\"" << fill << "\"";
        if (title.empty()) out_ << "/>\n";
        else out_ << "><title>" << escape(title) << "</title></rect>\n";
    }
    void circle(double x, double y, double r, const std::string& fill, const std::string& title = {}) {
        out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
             << "\" fill-opacity=\"0.8\"";
        if (title.empty()) out_ << "/>\n";
        else out_ << "><title>" << escape(title) << "</title></circle>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333333") {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void path(const std::string& d, const std::string& fill, const std::string& stroke) {
        out_ << "<path d=\"" << d << "\" fill=\"" << fill << "\" fill-opacity=\"0.5\" stroke=\"" << stroke << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const char* anchor = "start", double rotate = 0.0,
              int size = 10) {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size << "\" text-anchor=\""
             << anchor << "\"";
        if (rotate != 0.0) out_ << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y) << ")\"";
        out_ << ">" << escape(s) << "</text>\n";
    }
    std::string str() const {
        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
          << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\" font-family=\"sans-serif\">\n"
          << "<rect x=\"0\" y=\"0\" width=\"" << num(w_) << "\" height=\"" << num(h_) << "\" fill=\"#ffffff\"/>\n"
          << out_.str() << "</svg>\n";
        return s.str();
    }

private:
    double w_, h_;
    std::ostringstream out_;
};

std::map<std::string, std::string> group_colors(const json& groups) {
    std::map<std::string, std::string> colors;
    for (const auto& g : groups) colors.emplace(g.get<std::string>(), "");
    std::size_t i = 0;
    for (auto& [g, c] : colors) c = kPalette[i++ % std::size(kPalette)];
    return colors;
}

}  // namespace

std::string quality_plot(const json& quality) {
    const auto& rows = quality.at("features");
    const double bar = 14.0, left = 200.0, width = 400.0;
    Doc doc(left + width + 40.0, 40.0 + bar * static_cast<double>(rows.size()) + 30.0);
    doc.text(10, 20, "Feature value quality (fraction of series)", "start", 0.0, 12);
    const std::pair<const char*, const char*> parts[] = {
        {"numeric", "#009E73"}, {"nan", "#E69F00"}, {"pos_inf", "#D55E00"}, {"neg_inf", "#CC79A7"}};
    double y = 35.0;
    for (const auto& r : rows) {
        doc.text(left - 6, y + bar * 0.75, r.at("set").get<std::string>() + "/" + r.at("name").get<std::string>(), "end");
        double x = left;
        for (const auto& [key, color] : parts) {
            const double w = width * value_or_nan(r.at(key));
            if (w > 0.0) doc.rect(x, y, w, bar - 2, color, std::string(key) + ": " + num(value_or_nan(r.at(key))));
            x += std::max(0.0, w);
        }
        y += bar;
    }
    double lx = left;
    for (const auto& [key, color] : parts) {
        doc.rect(lx, y + 10, 10, 10, color);
        doc.text(lx + 14, y + 19, key);
        lx += 90;
    }
    return doc.str();
}

std::string matrix_heatmap(const json& m) {
    const auto& values = m.at("values");
    const auto& row_order = m.at("row_order");
    const auto& col_order = m.at("col_order");
    const std::size_t nr = row_order.size(), nc = col_order.size();
    const double cell_w = std::clamp(600.0 / std::max<std::size_t>(nc, 1), 4.0, 24.0);
    const double cell_h = std::clamp(600.0 / std::max<std::size_t>(nr, 1), 2.0, 16.0);
    const double left = 110.0, top = 150.0;
    Doc doc(left + cell_w * static_cast<double>(nc) + 20.0, top + cell_h * static_cast<double>(nr) + 20.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto j = col_order[c].get<std::size_t>();
        doc.text(left + cell_w * (static_cast<double>(c) + 0.7), top - 6,
                 m.at("col_sets")[j].get<std::string>() + "/" + m.at("col_names")[j].get<std::string>(), "start", -60.0, 8);
    }
    const bool labeled = !m.at("row_groups").empty();
    const auto colors = labeled ? group_colors(m.at("row_groups")) : std::map<std::string, std::string>{};
    for (std::size_t r = 0; r < nr; ++r) {
        const auto i = row_order[r].get<std::size_t>();
        const double y = top + cell_h * static_cast<double>(r);
        const std::string id = m.at("row_ids")[i].get<std::string>();
        if (labeled) doc.rect(left - 10, y, 8, cell_h, colors.at(m.at("row_groups")[i].get<std::string>()));
        if (cell_h >= 8.0) doc.text(left - 14, y + cell_h * 0.8, id, "end", 0.0, 8);
        for (std::size_t c = 0; c < nc; ++c) {
            const auto j = col_order[c].get<std::size_t>();
            const double v = value_or_nan(values[i][j]);
            doc.rect(left + cell_w * static_cast<double>(c), y, cell_w, cell_h, ramp(v),
                     id + " | " + m.at("col_names")[j].get<std::string>() + " | " + num(v));
        }
    }
    return doc.str();
}

std::string embedding_scatter(const json& e) {
    const auto& coords = e.at("coords");
    const double size = 480.0, pad = 50.0;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& p : coords) {
        xmin = std::min(xmin, p[0].get<double>());
        xmax = std::max(xmax, p[0].get<double>());
        ymin = std::min(ymin, p[1].get<double>());
        ymax = std::max(ymax, p[1].get<double>());
    }
    const double sx = xmax > xmin ? size / (xmax - xmin) : 1.0, sy = ymax > ymin ? size / (ymax - ymin) : 1.0;
    Doc doc(size + 2 * pad + 140.0, size + 2 * pad);
    const bool labeled = !e.at("groups").empty();
    const auto colors = labeled ? group_colors(e.at("groups")) : std::map<std::string, std::string>{};
    std::string xlabel = "Dimension 1", ylabel = "Dimension 2";
    if (e.contains("variance_explained")) {
        xlabel = "PC1 (" + num(100.0 * e["variance_explained"][0].get<double>()) + "%)";
        ylabel = "PC2 (" + num(100.0 * e["variance_explained"][1].get<double>()) + "%)";
    }
    doc.line(pad, pad + size, pad + size, pad + size);
    doc.line(pad, pad, pad, pad + size);
    doc.text(pad + size / 2, pad + size + 30, xlabel, "middle");
    doc.text(pad - 30, pad + size / 2, ylabel, "middle", -90.0);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double x = pad + (coords[i][0].get<double>() - xmin) * sx;
        const double y = pad + size - (coords[i][1].get<double>() - ymin) * sy;
        const std::string color = labeled ? colors.at(e.at("groups")[i].get<std::string>()) : kPalette[0];
        doc.circle(x, y, 4.0, color, e.at("ids")[i].get<std::string>());
    }
    double ly = pad;
    for (const auto& [g, c] : colors) {
        doc.circle(pad + size + 30, ly, 5.0, c);
        doc.text(pad + size + 40, ly + 4, g);
        ly += 18;
    }
    return doc.str();
}

std::string accuracy_bars(const json& report) {
    const auto& rows = report.at("rows");
    const double bar = 22.0, left = 180.0, width = 400.0;
    Doc doc(left + width + 60.0, 50.0 + bar * static_cast<double>(rows.size()) + 40.0);
    doc.text(10, 20, std::string("Mean ") + report.at("metric").get<std::string>() + " across folds", "start", 0.0, 12);
    double y = 35.0;
    for (const auto& r : rows) {
        const double mean = r.at("mean").get<double>(), sd = r.at("sd").get<double>();
        doc.text(left - 6, y + bar * 0.65, r.at("label").get<std::string>(), "end");
        doc.rect(left, y, width * mean, bar - 4, kPalette[0], num(mean) + " +/- " + num(sd));
        const double cy = y + (bar - 4) / 2;
        doc.line(left + width * std::max(0.0, mean - sd), cy, left + width * std::min(1.0, mean + sd), cy);
        y += bar;
    }
    doc.line(left, 30, left, y);
    for (int t = 0; t <= 4; ++t) {
        const double x = left + width * t / 4.0;
        doc.line(x, y, x, y + 4);
        doc.text(x, y + 16, num(t / 4.0), "middle");
    }
    return doc.str();
}

std::string correlation_heatmap(const json& top) {
    const auto& c = top.at("correlation");
    const auto& order = c.at("order");
    const std::size_t n = order.size();
    const double cell = std::clamp(500.0 / std::max<std::size_t>(n, 1), 6.0, 30.0), left = 220.0, top_pad = 20.0;
    Doc doc(left + cell * static_cast<double>(n) + 20.0, top_pad + cell * static_cast<double>(n) + 20.0);
    for (std::size_t a = 0; a < n; ++a) {
        const auto i = order[a].get<std::size_t>();
        doc.text(left - 6, top_pad + cell * (static_cast<double>(a) + 0.7), c.at("features")[i].get<std::string>(), "end", 0.0, 8);
        for (std::size_t b = 0; b < n; ++b) {
            const auto j = order[b].get<std::size_t>();
            const double v = value_or_nan(c.at("values")[i][j]);
            doc.rect(left + cell * static_cast<double>(b), top_pad + cell * static_cast<double>(a), cell, cell, ramp(v),
                     c.at("features")[i].get<std::string>() + " x " + c.at("features")[j].get<std::string>() + ": " + num(v));
        }
    }
    return doc.str();
}

std::string violins(const json& top) {
    const auto& vs = top.at("violins");
    const auto& classes = top.at("classes");
    const double panel_w = 80.0 * static_cast<double>(classes.size()) + 40.0, panel_h = 220.0;
    const std::size_t per_row = 4;
    const std::size_t rows = (vs.size() + per_row - 1) / per_row;
    Doc doc(panel_w * static_cast<double>(std::min(per_row, vs.size())) + 20.0, panel_h * static_cast<double>(rows) + 20.0);
    const auto colors = group_colors(classes);
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const auto& v = vs[k];
        const double ox = 10.0 + panel_w * static_cast<double>(k % per_row);
        const double oy = 10.0 + panel_h * static_cast<double>(k / per_row);
        doc.text(ox + panel_w / 2, oy + 12, v.at("set").get<std::string>() + "/" + v.at("name").get<std::string>(), "middle");
        const auto& grid = v.at("grid");
        const double lo = grid.front().get<double>(), hi = grid.back().get<double>();
        const double plot_top = oy + 24, plot_h = panel_h - 44;
        auto ypos = [&](double val) { return hi > lo ? plot_top + plot_h * (1.0 - (val - lo) / (hi - lo)) : plot_top + plot_h / 2; };
        double dmax = 0.0;
        for (const auto& cls : classes)
            for (const auto& d : v.at("density").at(cls.get<std::string>())) dmax = std::max(dmax, d.get<double>());
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const std::string name = classes[c].get<std::string>();
            const double cx = ox + 40.0 + 80.0 * static_cast<double>(c);
            const auto& dens = v.at("density").at(name);
            std::string right, left;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double half = dmax > 0 ? 35.0 * dens[g].get<double>() / dmax : 0.0;
                right += (g == 0 ? "M" : "L") + num(cx + half) + " " + num(ypos(grid[g].get<double>())) + " ";
                left = "L" + num(cx - half) + " " + num(ypos(grid[g].get<double>())) + " " + left;
            }
            doc.path(right + left + "Z", colors.at(name), colors.at(name));
            doc.text(cx, oy + panel_h - 6, name, "middle");
        }
        for (const auto& p : v.at("points")) {
            const std::string g = p.at("group").get<std::string>();
            const auto c = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), g) - classes.begin());
            doc.circle(ox + 40.0 + 80.0 * static_cast<double>(c), ypos(value_or_nan(p.at("value"))), 1.5, "#333333",
                       p.at("id").get<std::string>());
        }
    }
    return doc.str();
}

}  // namespace tsfeat::svg
