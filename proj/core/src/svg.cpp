#include "cams/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cams {

namespace {

const char* const kPalette[] = {"#1f4e9c", "#c0392b", "#2e8b57", "#7d3c98", "#d68910"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

class Canvas {
public:
    Canvas(double x0, double x1, double y0, double y1, std::string title, std::string xlabel, std::string ylabel)
        : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
        if (!(x1_ > x0_)) {
            x1_ = x0_ + 1.0;
        }
        if (!(y1_ > y0_)) {
            y1_ = y0_ + 1.0;
        }
        body_ << "<text x=\"" << num(kW / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(title)
              << "</text>\n";
        body_ << "<text x=\"" << num(kW / 2) << "\" y=\"" << num(kH - 8)
              << "\" text-anchor=\"middle\" font-size=\"12\">" << esc(xlabel) << "</text>\n";
        body_ << "<text x=\"16\" y=\"" << num(kH / 2) << "\" transform=\"rotate(-90 16 " << num(kH / 2)
              << ")\" text-anchor=\"middle\" font-size=\"12\">" << esc(ylabel) << "</text>\n";
        axes();
    }

    double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
    double py(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

    void line(double xa, double ya, double xb, double yb, const std::string& color, double width = 1.0,
              bool dashed = false) {
        body_ << "<line x1=\"" << num(px(xa)) << "\" y1=\"" << num(py(ya)) << "\" x2=\"" << num(px(xb)) << "\" y2=\""
              << num(py(yb)) << "\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << '"'
              << (dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
    }

    void circle(double x, double y, double r, const std::string& color) {
        body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << num(r) << "\" fill=\""
              << color << "\" fill-opacity=\"0.6\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color, bool dashed = false) {
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
              << (dashed ? " stroke-dasharray=\"4 3\"" : "") << " points=\"";
        for (const auto& [x, y] : pts) {
            body_ << num(px(x)) << ',' << num(py(y)) << ' ';
        }
        body_ << "\"/>\n";
    }

    void label(double x, double y, const std::string& text, const std::string& anchor = "start") {
        body_ << "<text x=\"" << num(px(x)) << "\" y=\"" << num(py(y)) << "\" font-size=\"10\" text-anchor=\""
              << anchor << "\">" << esc(text) << "</text>\n";
    }

    void legend(int slot, const std::string& text, const std::string& color) {
        const double y = kT + 14.0 * slot;
        body_ << "<rect x=\"" << num(kW - kR - 110) << "\" y=\"" << num(y - 8) << "\" width=\"10\" height=\"10\" fill=\""
              << color << "\"/>\n<text x=\"" << num(kW - kR - 95) << "\" y=\"" << num(y + 1)
              << "\" font-size=\"11\">" << esc(text) << "</text>\n";
    }

    std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
            << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    static constexpr double kW = 640, kH = 420, kL = 64, kR = 20, kT = 40, kB = 48;

    void axes() {
        body_ << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
              << kH - kT - kB << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double x = x0_ + (x1_ - x0_) * i / 4.0;
            const double y = y0_ + (y1_ - y0_) * i / 4.0;
            body_ << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kH - kB + 14)
                  << "\" font-size=\"10\" text-anchor=\"middle\">" << num(x) << "</text>\n";
            body_ << "<text x=\"" << num(kL - 4) << "\" y=\"" << num(py(y) + 3)
                  << "\" font-size=\"10\" text-anchor=\"end\">" << num(y) << "</text>\n";
        }
    }

    double x0_, x1_, y0_, y1_;
    std::ostringstream body_;
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    std::pair<double, double> padded() const {
        if (!(hi >= lo)) {
            return {0.0, 1.0};
        }
        const double pad = 0.05 * std::max(hi - lo, 1e-6);
        return {lo - pad, hi + pad};
    }
};

} // namespace

std::string bubble_svg(const MetaDataset& data, const std::vector<BubbleLine>& lines) {
    Range y;
    double wmax = 0.0;
    for (const auto& s : data.studies) {
        for (const auto* o : {&s.obs_a, &s.obs_b}) {
            if (!o->missing) {
                y.add(o->estimate);
                wmax = std::max(wmax, 1.0 / o->variance());
            }
        }
    }
    for (const auto& l : lines) {
        y.add(l.median);
    }
    const auto [ylo, yhi] = y.padded();
    Canvas c(0.0, 1.0, ylo, yhi, "Subgroup effects by information fraction", "information fraction", "effect (log scale)");
    for (const auto& s : data.studies) {
        for (const auto* o : {&s.obs_a, &s.obs_b}) {
            if (o->missing) {
                continue;
            }
            const double r = 2.0 + 10.0 * std::sqrt((1.0 / o->variance()) / wmax);
            c.circle(s.info_fraction, o->estimate, r, o == &s.obs_a ? kPalette[0] : kPalette[1]);
        }
    }
    for (const std::string method : {"CAMS", "BMS"}) {
        for (const std::string sg : {"A", "B"}) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& l : lines) {
                if (l.method == method && l.subgroup == sg) {
                    pts.emplace_back(l.pi, l.median);
                }
            }
            if (!pts.empty()) {
                c.polyline(pts, sg == "A" ? kPalette[0] : kPalette[1], method == "BMS");
            }
        }
    }
    c.legend(0, "subgroup A", kPalette[0]);
    c.legend(1, "subgroup B", kPalette[1]);
    return c.str();
}

std::string forest_svg(const MetaDataset& data, const std::vector<const FitResult*>& fits) {
    struct Item {
        std::string label;
        double est, lo, hi;
        int color;
    };
    std::vector<Item> items;
    for (const auto& s : data.studies) {
        const double se = std::sqrt(s.contrast_variance());
        items.push_back({s.study_id, s.contrast(), s.contrast() - 1.96 * se, s.contrast() + 1.96 * se, 0});
    }
    int color = 1;
    for (const FitResult* fit : fits) {
        if (fit == nullptr || !fit->has_location("gamma")) {
            continue;
        }
        const auto& g = fit->summary("gamma").summary;
        items.push_back({to_string(fit->estimator()) + " gamma", g.median, g.lower, g.upper, color++ % 5});
    }
    Range x;
    for (const auto& it : items) {
        x.add(it.lo);
        x.add(it.hi);
    }
    x.add(0.0);
    const auto [xlo, xhi] = x.padded();
    const double n = static_cast<double>(items.size());
    Canvas c(xlo, xhi, 0.0, n + 1.0, "Interaction: study contrasts and pooled estimates", "effect (log scale)", "");
    c.line(0.0, 0.0, 0.0, n + 1.0, "#888", 1.0, true);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double yy = n - static_cast<double>(i);
        const auto& it = items[i];
        c.line(it.lo, yy, it.hi, yy, kPalette[it.color], 1.5);
        c.circle(it.est, yy, 3.5, kPalette[it.color]);
        c.label(xlo, yy + 0.15, it.label);
    }
    return c.str();
}

std::string width_curve_svg(const OptimalIf& opt) {
    Range y;
    std::vector<std::pair<double, double>> total, a, b;
    for (const auto& p : opt.curve) {
        y.add(p.total());
        y.add(p.width_a);
        y.add(p.width_b);
        total.emplace_back(p.pi, p.total());
        a.emplace_back(p.pi, p.width_a);
        b.emplace_back(p.pi, p.width_b);
    }
    const auto [ylo, yhi] = y.padded();
    Canvas c(opt.range_lo, opt.range_hi, ylo, yhi, "Credible-interval width by reporting prevalence", "prevalence",
             "95% interval width");
    c.polyline(total, "#000");
    c.polyline(a, kPalette[0], true);
    c.polyline(b, kPalette[1], true);
    c.line(opt.pi, ylo, opt.pi, yhi, "#888", 1.0, true);
    c.legend(0, "total", "#000");
    c.legend(1, "subgroup A", kPalette[0]);
    c.legend(2, "subgroup B", kPalette[1]);
    return c.str();
}

std::string trace_svg(const std::vector<std::pair<std::string, std::vector<TracePoint>>>& traces) {
    Range x, y;
    for (const auto& [name, pts] : traces) {
        for (const auto& p : pts) {
            x.add(p.tau_gamma);
            y.add(p.lower);
            y.add(p.upper);
        }
    }
    const auto [xlo, xhi] = x.padded();
    const auto [ylo, yhi] = y.padded();
    Canvas c(xlo, xhi, ylo, yhi, "Conditional interaction given tau_gamma", "tau_gamma", "gamma (log scale)");
    int slot = 0;
    for (const auto& [name, pts] : traces) {
        std::vector<std::pair<double, double>> med, lo, hi;
        for (const auto& p : pts) {
            med.emplace_back(p.tau_gamma, p.median);
            lo.emplace_back(p.tau_gamma, p.lower);
            hi.emplace_back(p.tau_gamma, p.upper);
        }
        const char* col = kPalette[slot % 5];
        c.polyline(med, col);
        c.polyline(lo, col, true);
        c.polyline(hi, col, true);
        c.legend(slot++, name, col);
    }
    return c.str();
}

} // namespace cams
