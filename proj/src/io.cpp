#include "magfp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "magfp/errors.hpp"

namespace magfp::io {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(begin));
            return out;
        }
        out.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

/// Walks a CSV body line by line, handing each non-header line to row_fn as
/// (fields, line_no). Strips one UTF-8 BOM and trailing CRs.
template <typename RowFn>
void for_each_row(std::string_view text, std::span<const std::string_view> columns,
                  RowFn&& row_fn) {
    if (text.substr(0, 3) == "\xef\xbb\xbf") text.remove_prefix(3);

    int line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() && pos > text.size()) break;  // trailing newline

        const std::vector<std::string_view> fields = split_fields(line);
        if (!saw_header) {
            for (const std::string_view col : columns) {
                if (std::find(fields.begin(), fields.end(), col) == fields.end()) {
                    throw SchemaError("header is missing column '" + std::string(col) + "'",
                                      std::string(col));
                }
            }
            if (fields.size() != columns.size()) {
                throw SchemaError("header has unexpected extra columns",
                                  std::string(fields[columns.size()]));
            }
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (fields[i] != columns[i]) {
                    throw SchemaError("column '" + std::string(columns[i]) +
                                          "' is out of place",
                                      std::string(columns[i]));
                }
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != columns.size()) {
            throw ParseError("expected " + std::to_string(columns.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        row_fn(fields, line_no);
    }
    if (!saw_header) {
        throw SchemaError("file is empty, header row required", std::string(columns[0]));
    }
}

double parse_double_field(std::string_view field, std::string_view name, int line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("non-numeric value '" + std::string(field) + "' in column '" +
                             std::string(name) + "'",
                         line_no);
    }
    return v;
}

std::int64_t parse_int_field(std::string_view field, std::string_view name, int line_no) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("non-integer value '" + std::string(field) + "' in column '" +
                             std::string(name) + "'",
                         line_no);
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& file, std::string_view content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + file.string());
}

std::string serialize_map_csv(const FingerprintMap& map) {
    std::vector<const RefPoint*> points;
    points.reserve(map.total_points());
    for (const RefPath& path : map.paths) {
        for (const RefPoint& pt : path.points) points.push_back(&pt);
    }
    std::stable_sort(points.begin(), points.end(), [](const RefPoint* a, const RefPoint* b) {
        return std::pair(a->path_id, a->seq) < std::pair(b->path_id, b->seq);
    });

    std::string out = "point_id,path_id,seq,x_m,y_m,mv,mh\n";
    for (const RefPoint* pt : points) {
        out += std::to_string(pt->point_id);
        out += ',';
        out += std::to_string(pt->path_id);
        out += ',';
        out += std::to_string(pt->seq);
        out += ',';
        out += format_double(pt->pos.x);
        out += ',';
        out += format_double(pt->pos.y);
        out += ',';
        out += format_double(pt->feat.mv);
        out += ',';
        out += format_double(pt->feat.mh);
        out += '\n';
    }
    return out;
}

void save_map_csv(const FingerprintMap& map, const std::filesystem::path& file) {
    write_file(file, serialize_map_csv(map));
}

FingerprintMap parse_map_csv(std::string_view text) {
    static constexpr std::string_view columns[] = {"point_id", "path_id", "seq",
                                                   "x_m",      "y_m",     "mv", "mh"};
    FingerprintMap map;
    for_each_row(text, columns, [&](std::span<const std::string_view> f, int line_no) {
        RefPoint pt;
        pt.point_id = static_cast<int>(parse_int_field(f[0], "point_id", line_no));
        pt.path_id = static_cast<int>(parse_int_field(f[1], "path_id", line_no));
        pt.seq = static_cast<int>(parse_int_field(f[2], "seq", line_no));
        pt.pos.x = parse_double_field(f[3], "x_m", line_no);
        pt.pos.y = parse_double_field(f[4], "y_m", line_no);
        pt.feat.mv = parse_double_field(f[5], "mv", line_no);
        pt.feat.mh = parse_double_field(f[6], "mh", line_no);

        if (map.paths.empty() || map.paths.back().path_id != pt.path_id) {
            if (!map.paths.empty() && pt.path_id < map.paths.back().path_id) {
                throw ParseError("rows are not sorted by (path_id, seq)", line_no);
            }
            for (const RefPath& prev : map.paths) {
                if (prev.path_id == pt.path_id) {
                    throw ParseError("path_id " + std::to_string(pt.path_id) +
                                         " reappears after other paths",
                                     line_no);
                }
            }
            map.paths.push_back({pt.path_id, {}});
        }
        RefPath& path = map.paths.back();
        if (pt.seq != static_cast<int>(path.points.size())) {
            throw ParseError("seq " + std::to_string(pt.seq) + " out of order in path " +
                                 std::to_string(pt.path_id),
                             line_no);
        }
        path.points.push_back(pt);
    });

    // The format carries no spacing column; recover it from the data.
    for (const RefPath& path : map.paths) {
        if (path.points.size() >= 2) {
            const Vec2& a = path.points[0].pos;
            const Vec2& b = path.points[1].pos;
            map.spacing_m = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y));
            break;
        }
    }
    return map;
}

FingerprintMap load_map_csv(const std::filesystem::path& file) {
    return parse_map_csv(read_file(file));
}

std::string serialize_map_json(const FingerprintMap& map) {
    ojson j;
    j["spacing_m"] = map.spacing_m;
    j["meta"] = ojson::object();
    for (const auto& [k, v] : map.meta) j["meta"][k] = v;
    j["paths"] = ojson::array();
    for (const RefPath& path : map.paths) {
        ojson jp;
        jp["path_id"] = path.path_id;
        jp["points"] = ojson::array();
        for (const RefPoint& pt : path.points) {
            jp["points"].push_back({{"point_id", pt.point_id},
                                    {"seq", pt.seq},
                                    {"x_m", pt.pos.x},
                                    {"y_m", pt.pos.y},
                                    {"mv", pt.feat.mv},
                                    {"mh", pt.feat.mh}});
        }
        j["paths"].push_back(std::move(jp));
    }
    return j.dump(2) + "\n";
}

void save_map_json(const FingerprintMap& map, const std::filesystem::path& file) {
    write_file(file, serialize_map_json(map));
}

std::vector<SensorSample> parse_sensor_log_csv(std::string_view text) {
    static constexpr std::string_view columns[] = {"timestamp_us", "mx", "my", "mz", "ax",
                                                   "ay",           "az", "gx", "gy", "gz"};
    std::vector<SensorSample> out;
    for_each_row(text, columns, [&](std::span<const std::string_view> f, int line_no) {
        SensorSample s;
        s.timestamp_us = parse_int_field(f[0], "timestamp_us", line_no);
        s.m = {parse_double_field(f[1], "mx", line_no), parse_double_field(f[2], "my", line_no),
               parse_double_field(f[3], "mz", line_no)};
        s.a = {parse_double_field(f[4], "ax", line_no), parse_double_field(f[5], "ay", line_no),
               parse_double_field(f[6], "az", line_no)};
        s.g = {parse_double_field(f[7], "gx", line_no), parse_double_field(f[8], "gy", line_no),
               parse_double_field(f[9], "gz", line_no)};
        if (!out.empty() && s.timestamp_us < out.back().timestamp_us) {
            throw ParseError("timestamps are not monotone non-decreasing", line_no);
        }
        out.push_back(s);
    });
    return out;
}

std::vector<SensorSample> load_sensor_log_csv(const std::filesystem::path& file) {
    return parse_sensor_log_csv(read_file(file));
}

std::vector<Marker> parse_marker_csv(std::string_view text) {
    static constexpr std::string_view columns[] = {"timestamp_us", "x_m", "y_m"};
    std::vector<Marker> out;
    for_each_row(text, columns, [&](std::span<const std::string_view> f, int line_no) {
        Marker mk;
        mk.timestamp_us = parse_int_field(f[0], "timestamp_us", line_no);
        mk.pos.x = parse_double_field(f[1], "x_m", line_no);
        mk.pos.y = parse_double_field(f[2], "y_m", line_no);
        out.push_back(mk);
    });
    return out;
}

std::vector<Marker> load_marker_csv(const std::filesystem::path& file) {
    return parse_marker_csv(read_file(file));
}

std::string serialize_targets_csv(std::span<const TargetCase> cases) {
    std::string out = "case_id,seq,x_m,y_m,mv,mh\n";
    for (const TargetCase& c : cases) {
        for (int k = 0; k < c.window.length(); ++k) {
            out += std::to_string(c.case_id);
            out += ',';
            out += std::to_string(k);
            out += ',';
            out += format_double(c.window.coords[k].x);
            out += ',';
            out += format_double(c.window.coords[k].y);
            out += ',';
            out += format_double(c.window.feats[k].mv);
            out += ',';
            out += format_double(c.window.feats[k].mh);
            out += '\n';
        }
    }
    return out;
}

void save_targets_csv(std::span<const TargetCase> cases, const std::filesystem::path& file) {
    write_file(file, serialize_targets_csv(cases));
}

std::vector<TargetCase> parse_targets_csv(std::string_view text) {
    static constexpr std::string_view columns[] = {"case_id", "seq", "x_m", "y_m", "mv", "mh"};
    std::vector<TargetCase> out;
    for_each_row(text, columns, [&](std::span<const std::string_view> f, int line_no) {
        const int case_id = static_cast<int>(parse_int_field(f[0], "case_id", line_no));
        const int seq = static_cast<int>(parse_int_field(f[1], "seq", line_no));
        const double x = parse_double_field(f[2], "x_m", line_no);
        const double y = parse_double_field(f[3], "y_m", line_no);
        const double mv = parse_double_field(f[4], "mv", line_no);
        const double mh = parse_double_field(f[5], "mh", line_no);

        if (out.empty() || out.back().case_id != case_id) {
            if (!out.empty() && case_id < out.back().case_id) {
                throw ParseError("rows are not sorted by (case_id, seq)", line_no);
            }
            for (const TargetCase& prev : out) {
                if (prev.case_id == case_id) {
                    throw ParseError("case_id " + std::to_string(case_id) +
                                         " reappears after other cases",
                                     line_no);
                }
            }
            TargetCase c;
            c.case_id = case_id;
            c.window.path_id = case_id;
            out.push_back(std::move(c));
        }
        TargetCase& c = out.back();
        if (seq != c.window.length()) {
            throw ParseError("seq " + std::to_string(seq) + " out of order in case " +
                                 std::to_string(case_id),
                             line_no);
        }
        c.window.feats.push_back({mv, mh});
        c.window.coords.push_back({x, y});
    });
    return out;
}

std::vector<TargetCase> load_targets_csv(const std::filesystem::path& file) {
    return parse_targets_csv(read_file(file));
}

std::string serialize_path_features_csv(std::span<const PathFeature> feats) {
    std::string out = "x_m,y_m,mv,mh\n";
    for (const PathFeature& pf : feats) {
        out += format_double(pf.pos.x);
        out += ',';
        out += format_double(pf.pos.y);
        out += ',';
        out += format_double(pf.feat.mv);
        out += ',';
        out += format_double(pf.feat.mh);
        out += '\n';
    }
    return out;
}

void save_path_features_csv(std::span<const PathFeature> feats,
                            const std::filesystem::path& file) {
    write_file(file, serialize_path_features_csv(feats));
}

}  // namespace magfp::io
