#include "daqd/plot.hpp"

#include "daqd/core_types.hpp"
#include "daqd/loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace daqd {

namespace {

namespace fs = std::filesystem;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

double metric_of(const MetricsRow& r, const std::string& metric)
{
    if (metric == "repertoire_size")
        return static_cast<double>(r.repertoire_size);
    if (metric == "qd_score")
        return r.qd_score;
    if (metric == "imagined_size")
        return static_cast<double>(r.imagined_size);
    throw ConfigError("cannot plot metric '" + metric + "'");
}

/// Directory naming the variant a metrics file belongs to.
fs::path series_key(const fs::path& csv)
{
    fs::path dir = csv.parent_path();
    if (dir.filename().string().rfind("rep_", 0) == 0)
        dir = dir.parent_path();
    return dir;
}

std::string series_label(const fs::path& key, const fs::path& csv)
{
    const std::string name = key.filename().string();
    return name.empty() ? csv.stem().string() : name;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    if (std::abs(v) >= 1e5 || (v != 0.0 && std::abs(v) < 1e-2))
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::vector<double> nice_ticks(double lo, double hi)
{
    if (hi <= lo)
        hi = lo + 1.0;
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
        t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

} // namespace

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw DimensionError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size())
        return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<SeriesSummary> summarize_metrics(const std::vector<fs::path>& csvs, const std::string& metric)
{
    if (csvs.empty())
        throw ConfigError("plot needs at least one metrics CSV");
    std::vector<fs::path> order;
    std::map<fs::path, std::vector<std::vector<MetricsRow>>> groups;
    std::map<fs::path, std::string> labels;
    for (const fs::path& csv : csvs) {
        auto rows = read_metrics_csv(csv);
        if (rows.empty())
            throw ParseError("no data rows in " + csv.string(), 2);
        const fs::path key = series_key(csv);
        if (!groups.count(key)) {
            order.push_back(key);
            labels[key] = series_label(key, csv);
        }
        groups[key].push_back(std::move(rows));
    }

    std::vector<SeriesSummary> out;
    for (const fs::path& key : order) {
        const auto& runs = groups[key];
        SeriesSummary s;
        s.label = labels[key];
        s.replications = runs.size();
        std::vector<double> xs;
        for (const auto& run : runs)
            for (const auto& r : run)
                xs.push_back(static_cast<double>(r.evals_used));
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (double x : xs) {
            std::vector<double> vals;
            for (const auto& run : runs) {
                const MetricsRow* last = nullptr;
                for (const auto& r : run)
                    if (static_cast<double>(r.evals_used) <= x)
                        last = &r;
                if (last)
                    vals.push_back(metric_of(*last, metric));
            }
            if (vals.empty())
                continue;
            s.x.push_back(x);
            s.median.push_back(quantile(vals, 0.5));
            s.q25.push_back(quantile(vals, 0.25));
            s.q75.push_back(quantile(vals, 0.75));
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_svg(const std::vector<SeriesSummary>& series, const std::string& metric)
{
    constexpr double W = 720, H = 440, ml = 80, mr = 160, mt = 40, mb = 60;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double lo = s.has_band() ? s.q25[i] : s.median[i];
            const double hi = s.has_band() ? s.q75[i] : s.median[i];
            if (first) {
                x0 = x1 = s.x[i];
                y0 = lo;
                y1 = hi;
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, lo);
            y1 = std::max(y1, hi);
        }
    if (x1 <= x0)
        x1 = x0 + 1;
    if (y1 <= y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(ml) << "\" y=\"24\" font-size=\"15\">" << escape(metric) << "</text>\n";
    for (double t : nice_ticks(x0, x1)) {
        os << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(H - mb) << "\" x2=\"" << fmt(px(t)) << "\" y2=\""
           << fmt(mt) << "\" stroke=\"#e5e5e5\"/>\n";
        os << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(H - mb + 18) << "\" text-anchor=\"middle\">"
           << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(y0, y1)) {
        os << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(W - mr) << "\" y2=\""
           << fmt(py(t)) << "\" stroke=\"#e5e5e5\"/>\n";
        os << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
           << "</text>\n";
    }
    os << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(W - ml - mr) << "\" height=\""
       << fmt(H - mt - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt((ml + W - mr) / 2) << "\" y=\"" << fmt(H - 16)
       << "\" text-anchor=\"middle\">env evaluations</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        if (s.has_band() && !s.x.empty()) {
            os << "<polygon class=\"iqr\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << fmt(px(s.x[i])) << ',' << fmt(py(s.q75[i])) << ' ';
            for (std::size_t i = s.x.size(); i-- > 0;)
                os << fmt(px(s.x[i])) << ',' << fmt(py(s.q25[i])) << ' ';
            os << "\"/>\n";
        }
        os << "<polyline class=\"median\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << fmt(px(s.x[i])) << ',' << fmt(py(s.median[i])) << ' ';
        os << "\"/>\n";
        const double ly = mt + 16 + 20 * static_cast<double>(k);
        os << "<line x1=\"" << fmt(W - mr + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(W - mr + 36)
           << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << fmt(W - mr + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label) << " (n="
           << s.replications << ")</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<fs::path> plot_metrics(const std::vector<fs::path>& csvs, const fs::path& out_dir)
{
    std::vector<fs::path> written;
    std::vector<std::pair<std::string, std::vector<SeriesSummary>>> all;
    for (const char* metric : kPlotMetrics)
        all.emplace_back(metric, summarize_metrics(csvs, metric));
    fs::create_directories(out_dir);
    for (const auto& [metric, series] : all) {
        const fs::path path = out_dir / (metric + ".svg");
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot open " + path.string() + " for writing");
        os << render_svg(series, metric);
        if (!os)
            throw IoError("write failed for " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace daqd
