#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haze/errors.hpp"
#include "haze/ingest.hpp"
#include "haze/mobility.hpp"
#include "haze/model.hpp"

namespace haze {

/// Missing inputs or contradictory options. Mapped to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

enum class Subcommand { IngestCheck, Classify, Temporal, Spatial, Mobility, Synth, All };
std::string_view to_string(Subcommand s);
Subcommand parse_subcommand(std::string_view text);

struct RunConfig {
    std::optional<std::filesystem::path> posts;
    std::optional<std::filesystem::path> hotspots;
    std::optional<std::filesystem::path> regions;
    std::optional<std::filesystem::path> air_quality;
    std::filesystem::path taxonomies;
    std::optional<std::filesystem::path> meta_keywords;
    std::optional<std::filesystem::path> scenario;  // synth config
    std::filesystem::path out = "out";

    int utc_offset_minutes = 420;
    DistanceMode distance = DistanceMode::Haversine;
    bool strict = false;
    double max_malformed_fraction = 0.01;
    bool peatland_only = true;
    bool high_confidence_only = true;
    std::optional<BoundingBox> bbox;

    std::int64_t week_low = 100;
    std::int64_t week_high = 400;
    std::vector<IsoWeek> exclude_weeks;
    std::vector<IsoWeek> evac_weeks{IsoWeek{2014, 11}};

    std::optional<std::uint64_t> seed;  // unset: 0 for analyses, the scenario's own seed for synth
    std::size_t iterations = 1000;
    double bin_width = 5.0;

    std::size_t tau = 4;
    double rs_threshold = 1.0 / 3.0;
    std::vector<double> distance_bins{0.0, 50.0, 500.0};
    Pairing pairing = Pairing::All;
    std::optional<std::string> home_region;
    std::optional<std::string> home_province;
    std::optional<Date> day_from;
    std::optional<Date> day_to;

    unsigned threads = 1;  // never changes results; left out of the resolved config
};

/// Resolved config as JSON. `threads` is omitted so runs differing only in it dump identical files.
std::string to_json(const RunConfig& config);
/// Overlays the keys present in `json` onto `base`. Unknown keys are ConfigError.
RunConfig apply_config_json(RunConfig base, std::string_view json);
RunConfig apply_config_file(RunConfig base, const std::filesystem::path& path);

std::vector<IsoWeek> parse_week_list(std::string_view text);  // "2014-W10,2014-W11"
std::pair<std::int64_t, std::int64_t> parse_week_bounds(std::string_view text);  // "100,400"
std::vector<double> parse_number_list(std::string_view text);

std::string sha256_hex(const std::filesystem::path& file);

/// Runs one subcommand. Errors go to `log` with file/line context; returns the exit code
/// (0 success, 1 validation or data failure, 2 usage error).
int run(Subcommand sub, const RunConfig& config, std::ostream& log);

}  // namespace haze
