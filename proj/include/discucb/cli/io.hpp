#ifndef DISCUCB_CLI_IO_HPP
#define DISCUCB_CLI_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include <discucb/cli/config.hpp>

namespace discucb::cli {

    namespace fs = std::filesystem;
    using Json = nlohmann::json;

    /// Shortest round-trip decimal form; "nan" / "inf" / "-inf" otherwise.
    inline std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    }

    inline double parse_double(const std::string& s)
    {
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw InputError("not a number: '" + s + "'");
        return v;
    }

    /// Write through a temporary file and rename, so readers never see a
    /// half-written file. Binary mode keeps LF line endings.
    inline void write_file(const fs::path& path, const std::string& content)
    {
        if (path.has_parent_path())
            fs::create_directories(path.parent_path());
        fs::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f)
                throw std::runtime_error("cannot write " + tmp.string());
            f << content;
            if (!f)
                throw std::runtime_error("write failed: " + tmp.string());
        }
        fs::rename(tmp, path);
    }

    inline std::string read_file(const fs::path& path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot read " + path.string());
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    inline constexpr const char* kRowHeader = "tau,max_variance,mse,mean_visited_discrepancy,assumption3_held,wall_time_s";

    inline std::string format_row(const EpisodeRow& r)
    {
        return std::to_string(r.tau) + "," + format_double(r.max_variance) + "," + format_double(r.mse) + ","
            + format_double(r.mean_visited_discrepancy) + "," + (r.assumption3_held ? "1" : "0") + ","
            + format_double(r.wall_time_s);
    }

    /// One row per completed episode, header first.
    inline std::string trial_csv(const CampaignRecord& rec)
    {
        std::string out = std::string(kRowHeader) + "\n";
        for (const auto& r : rec.rows)
            out += format_row(r) + "\n";
        return out;
    }

    inline std::vector<EpisodeRow> parse_trial_csv(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != kRowHeader)
            throw InputError("trial CSV: unexpected header");
        std::vector<EpisodeRow> rows;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                f.push_back(cell);
            if (f.size() != 6)
                throw InputError("trial CSV: expected 6 fields");
            rows.push_back({std::stoi(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), f[4] == "1", parse_double(f[5])});
        }
        return rows;
    }

    struct Band {
        double mean = 0.0, min = 0.0, max = 0.0;
    };

    inline Band band_of(const std::vector<double>& v)
    {
        Band b;
        std::vector<double> f;
        for (double x : v)
            if (std::isfinite(x))
                f.push_back(x);
        if (f.empty())
            return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        double sum = 0.0;
        for (double x : f)
            sum += x;
        b.mean = sum / static_cast<double>(f.size());
        b.min = *std::min_element(f.begin(), f.end());
        b.max = *std::max_element(f.begin(), f.end());
        return b;
    }

    /// Per-episode mean/min/max across trials of the three curves.
    struct AggregateRow {
        int tau = 0;
        Band max_variance, mse, discrepancy;
        double assumption3_fraction = 0.0;
        double wall_time_mean = 0.0;
    };

    inline std::vector<AggregateRow> aggregate(const std::vector<CampaignRecord>& trials)
    {
        std::vector<AggregateRow> out;
        if (trials.empty())
            return out;
        std::size_t n = trials.front().rows.size();
        for (const auto& t : trials)
            n = std::min(n, t.rows.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v, m, d, w;
            double a3 = 0.0;
            for (const auto& t : trials) {
                v.push_back(t.rows[i].max_variance);
                m.push_back(t.rows[i].mse);
                d.push_back(t.rows[i].mean_visited_discrepancy);
                w.push_back(t.rows[i].wall_time_s);
                a3 += t.rows[i].assumption3_held ? 1.0 : 0.0;
            }
            out.push_back({trials.front().rows[i].tau, band_of(v), band_of(m), band_of(d), a3 / static_cast<double>(trials.size()), band_of(w).mean});
        }
        return out;
    }

    inline std::string aggregate_csv(const std::vector<AggregateRow>& rows)
    {
        std::string out = "tau,max_variance_mean,max_variance_min,max_variance_max,mse_mean,mse_min,mse_max,"
                          "mean_visited_discrepancy_mean,mean_visited_discrepancy_min,mean_visited_discrepancy_max,"
                          "assumption3_held_fraction,wall_time_s_mean\n";
        for (const auto& r : rows) {
            out += std::to_string(r.tau);
            for (const Band* b : {&r.max_variance, &r.mse, &r.discrepancy})
                out += "," + format_double(b->mean) + "," + format_double(b->min) + "," + format_double(b->max);
            out += "," + format_double(r.assumption3_fraction) + "," + format_double(r.wall_time_mean) + "\n";
        }
        return out;
    }

    /// tau = 0 metrics of each trial's prior model, one line per trial.
    inline std::string baseline_csv(const std::vector<CampaignRecord>& trials)
    {
        std::string out = "trial," + std::string(kRowHeader) + "\n";
        for (std::size_t i = 0; i < trials.size(); ++i)
            out += std::to_string(i) + "," + format_row(trials[i].baseline) + "\n";
        return out;
    }

    inline std::string grid_csv(const Matrix& grid, const std::vector<std::string>& names)
    {
        std::string out;
        for (std::size_t i = 0; i < names.size(); ++i)
            out += (i ? "," : "") + names[i];
        out += "\n";
        for (Index r = 0; r < grid.rows(); ++r) {
            for (Index c = 0; c < grid.cols(); ++c)
                out += (c ? "," : "") + format_double(grid(r, c));
            out += "\n";
        }
        return out;
    }

    // ---- snapshots -------------------------------------------------------

    inline Json vec_json(const Vector& v)
    {
        Json a = Json::array();
        for (Index i = 0; i < v.size(); ++i)
            a.push_back(v[i]);
        return a;
    }

    inline Vector json_vec(const Json& a)
    {
        Vector v(static_cast<Index>(a.size()));
        for (Index i = 0; i < v.size(); ++i)
            v[i] = a[static_cast<std::size_t>(i)].get<double>();
        return v;
    }

    inline Json num_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

    inline double json_num(const Json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

    inline Json row_json(const EpisodeRow& r)
    {
        return Json{{"tau", r.tau}, {"max_variance", num_json(r.max_variance)}, {"mse", num_json(r.mse)},
            {"mean_visited_discrepancy", num_json(r.mean_visited_discrepancy)}, {"assumption3_held", r.assumption3_held},
            {"wall_time_s", num_json(r.wall_time_s)}};
    }

    inline EpisodeRow json_row(const Json& j)
    {
        return {j.at("tau").get<int>(), json_num(j.at("max_variance")), json_num(j.at("mse")),
            json_num(j.at("mean_visited_discrepancy")), j.at("assumption3_held").get<bool>(), json_num(j.at("wall_time_s"))};
    }

    /// Model snapshot: the data logs (the model is rebuilt by replay) plus
    /// the metric record. Doubles are written in round-trip form.
    inline Json snapshot_json(const CampaignState& st, const std::string& hash, int trial, std::uint64_t master_seed)
    {
        Json logs = Json::array();
        for (const auto& log : st.logs) {
            Json visited = Json::array();
            for (const auto& v : log.visited)
                visited.push_back({{"z", vec_json(v.z)}, {"y", vec_json(v.y)}, {"variance", v.variance}, {"discrepancy", v.discrepancy}});
            logs.push_back({{"tau", log.tau}, {"reset_state", vec_json(log.reset_state)}, {"visited", visited}});
        }
        Json rows = Json::array();
        double recorded = 0.0; // sum of the rows' wall_time_s
        for (const auto& r : st.record.rows) {
            rows.push_back(row_json(r));
            recorded += r.wall_time_s;
        }
        return Json{{"format", "discucb-snapshot-1"}, {"config_hash", hash}, {"trial", trial},
            {"master_seed", master_seed}, {"trial_seed", st.record.trial_seed}, {"elapsed_s", recorded},
            {"baseline", row_json(st.record.baseline)}, {"rows", rows}, {"logs", logs}};
    }

    struct Snapshot {
        std::string config_hash;
        int trial = 0;
        CampaignState state;
    };

    inline Snapshot parse_snapshot(const Json& j)
    {
        if (j.value("format", "") != "discucb-snapshot-1")
            throw InputError("snapshot: unknown format");
        Snapshot s;
        s.config_hash = j.at("config_hash").get<std::string>();
        s.trial = j.at("trial").get<int>();
        CampaignState& st = s.state;
        st.record.config_hash = s.config_hash;
        st.record.master_seed = j.at("master_seed").get<std::uint64_t>();
        st.record.trial_seed = j.at("trial_seed").get<std::uint64_t>();
        st.elapsed_s = j.at("elapsed_s").get<double>();
        st.record.baseline = json_row(j.at("baseline"));
        for (const auto& r : j.at("rows"))
            st.record.rows.push_back(json_row(r));
        for (const auto& l : j.at("logs")) {
            EpisodeLog log;
            log.tau = l.at("tau").get<int>();
            log.reset_state = json_vec(l.at("reset_state"));
            for (const auto& v : l.at("visited"))
                log.visited.push_back({json_vec(v.at("z")), json_vec(v.at("y")), v.at("variance").get<double>(), v.at("discrepancy").get<double>()});
            st.logs.push_back(std::move(log));
        }
        if (st.logs.size() != st.record.rows.size())
            throw InputError("snapshot: logs and rows disagree");
        return s;
    }

    inline Snapshot load_snapshot(const fs::path& path)
    {
        try {
            return parse_snapshot(Json::parse(read_file(path)));
        }
        catch (const Json::exception& e) {
            throw InputError("snapshot " + path.string() + ": " + e.what());
        }
    }

    // ---- SVG ---------------------------------------------------------------

    struct Series {
        std::string name;
        std::vector<double> x, mean, lo, hi; // lo/hi empty: no band
    };

    inline const char* palette(std::size_t i)
    {
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
        return colors[i % 6];
    }

    inline std::string xml_escape(const std::string& s)
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

    inline std::string svg_num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    /// Line plot with optional min/max bands. Non-finite values are skipped
    /// (and non-positive ones on a log axis).
    inline std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
        const std::vector<Series>& series, bool log_y = false)
    {
        const double W = 720, H = 440, L = 80, R = 180, T = 40, B = 60;
        const double pw = W - L - R, ph = H - T - B;
        auto usable = [&](double v) { return std::isfinite(v) && (!log_y || v > 0.0); };
        auto ty = [&](double v) { return log_y ? std::log10(v) : v; };

        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                for (const auto* v : {&s.mean, &s.lo, &s.hi})
                    if (i < v->size() && usable((*v)[i])) {
                        ymin = std::min(ymin, ty((*v)[i]));
                        ymax = std::max(ymax, ty((*v)[i]));
                    }
            }
        if (!std::isfinite(xmin)) {
            xmin = 0;
            xmax = 1;
        }
        if (!std::isfinite(ymin)) {
            ymin = 0;
            ymax = 1;
        }
        if (xmax == xmin)
            xmax = xmin + 1;
        if (ymax == ymin) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
        auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double y) { return T + (1.0 - (ty(y) - ymin) / (ymax - ymin)) * ph; };

        std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H)
            + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        o += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) + "</text>\n";
        o += "<rect x=\"" + svg_num(L) + "\" y=\"" + svg_num(T) + "\" width=\"" + svg_num(pw) + "\" height=\"" + svg_num(ph)
            + "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 5; ++k) {
            const double yv = ymin + (ymax - ymin) * k / 5.0;
            const double yp = T + (1.0 - k / 5.0) * ph;
            const std::string label = log_y ? "1e" + svg_num(yv) : format_double(std::round(yv * 1e4) / 1e4);
            o += "<line x1=\"" + svg_num(L - 4) + "\" x2=\"" + svg_num(L) + "\" y1=\"" + svg_num(yp) + "\" y2=\"" + svg_num(yp)
                + "\" stroke=\"black\"/>\n";
            o += "<text x=\"" + svg_num(L - 6) + "\" y=\"" + svg_num(yp + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
            const double xv = xmin + (xmax - xmin) * k / 5.0;
            const double xp = L + pw * k / 5.0;
            o += "<text x=\"" + svg_num(xp) + "\" y=\"" + svg_num(T + ph + 18) + "\" text-anchor=\"middle\">"
                + format_double(std::round(xv * 100) / 100) + "</text>\n";
        }
        o += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(H - 14) + "\" text-anchor=\"middle\">" + xml_escape(xlabel) + "</text>\n";
        o += "<text transform=\"translate(18," + svg_num(T + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">"
            + xml_escape(ylabel) + (log_y ? " (log)" : "") + "</text>\n";

        for (std::size_t s = 0; s < series.size(); ++s) {
            const Series& S = series[s];
            const std::string color = palette(s);
            if (S.lo.size() == S.x.size() && S.hi.size() == S.x.size()) {
                std::string up, down;
                for (std::size_t i = 0; i < S.x.size(); ++i)
                    if (usable(S.hi[i]) && usable(S.lo[i])) {
                        up += svg_num(px(S.x[i])) + "," + svg_num(py(S.hi[i])) + " ";
                        down = svg_num(px(S.x[i])) + "," + svg_num(py(S.lo[i])) + " " + down;
                    }
                if (!up.empty())
                    o += "<polygon points=\"" + up + down + "\" fill=\"" + color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
            }
            std::string pts;
            for (std::size_t i = 0; i < S.x.size() && i < S.mean.size(); ++i)
                if (usable(S.mean[i]))
                    pts += svg_num(px(S.x[i])) + "," + svg_num(py(S.mean[i])) + " ";
            o += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
            const double ly = T + 16 + 18.0 * static_cast<double>(s);
            o += "<line x1=\"" + svg_num(L + pw + 12) + "\" x2=\"" + svg_num(L + pw + 36) + "\" y1=\"" + svg_num(ly) + "\" y2=\""
                + svg_num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
            o += "<text x=\"" + svg_num(L + pw + 42) + "\" y=\"" + svg_num(ly + 4) + "\">" + xml_escape(S.name) + "</text>\n";
        }
        o += "</svg>\n";
        return o;
    }

} // namespace discucb::cli

#endif
