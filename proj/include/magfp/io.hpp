#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magfp/features.hpp"
#include "magfp/fingerprint_map.hpp"

namespace magfp::io {

// CSV formats. All files are UTF-8, comma-separated, LF line endings, with a
// mandatory header row; floats are written with shortest round-trip
// formatting. Readers throw ParseError (with the 1-based line) on bad rows
// and SchemaError (naming the column) on a bad header.
//
//   map CSV         point_id,path_id,seq,x_m,y_m,mv,mh     sorted by (path_id, seq)
//   sensor log CSV  timestamp_us,mx,my,mz,ax,ay,az,gx,gy,gz
//   marker CSV      timestamp_us,x_m,y_m
//   target CSV      case_id,seq,x_m,y_m,mv,mh              sorted by (case_id, seq)

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

std::string serialize_map_csv(const FingerprintMap& map);
void save_map_csv(const FingerprintMap& map, const std::filesystem::path& file);
/// Rows must arrive sorted by (path_id, seq) with seq counting from 0.
/// spacing_m is recovered from the first adjacent pair (default 0.30 when no
/// path has two points).
FingerprintMap parse_map_csv(std::string_view text);
FingerprintMap load_map_csv(const std::filesystem::path& file);

/// Convenience mirror of the map with spacing and meta included.
std::string serialize_map_json(const FingerprintMap& map);
void save_map_json(const FingerprintMap& map, const std::filesystem::path& file);

std::vector<SensorSample> parse_sensor_log_csv(std::string_view text);
std::vector<SensorSample> load_sensor_log_csv(const std::filesystem::path& file);

std::vector<Marker> parse_marker_csv(std::string_view text);
std::vector<Marker> load_marker_csv(const std::filesystem::path& file);

/// One matching query as stored in a target CSV: the window's true
/// coordinates plus its features. Window identity fields are not persisted;
/// parsed cases come back with path_id = case_id, start = 0, forward.
struct TargetCase {
    int case_id = 0;
    Window window;
};

std::string serialize_targets_csv(std::span<const TargetCase> cases);
void save_targets_csv(std::span<const TargetCase> cases, const std::filesystem::path& file);
std::vector<TargetCase> parse_targets_csv(std::string_view text);
std::vector<TargetCase> load_targets_csv(const std::filesystem::path& file);

/// Extraction output: x_m,y_m,mv,mh per marker.
std::string serialize_path_features_csv(std::span<const PathFeature> feats);
void save_path_features_csv(std::span<const PathFeature> feats,
                            const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view content);

}  // namespace magfp::io
