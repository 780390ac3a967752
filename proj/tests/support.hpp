#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <unistd.h>

#include "haze/model.hpp"

namespace haze::test {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("haze-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline Date ymd(int y, unsigned m, unsigned d) {
    return std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

// Noon local time (UTC+7) on the given day.
inline Instant local_noon(Date d) { return Instant{d} + std::chrono::hours{5}; }

inline GeoPost post(std::string id, std::string user, Date day, double lat, double lon, std::string text = "",
                    std::string source = "") {
    GeoPost p;
    p.id = std::move(id);
    p.user_id = std::move(user);
    p.timestamp = local_noon(day);
    p.location = GeoPoint(lat, lon);
    p.text = std::move(text);
    p.source = std::move(source);
    return p;
}

inline FireHotspot hotspot(std::string id, Date day, double lat, double lon, bool high = true, bool peat = true) {
    FireHotspot h;
    h.id = std::move(id);
    h.date = day;
    h.location = GeoPoint(lat, lon);
    h.confidence = high ? Confidence::High : Confidence::Low;
    h.peatland = peat;
    return h;
}

}  // namespace haze::test
