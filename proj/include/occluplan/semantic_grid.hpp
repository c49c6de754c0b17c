#pragma once

// BEV semantic raster: class palette, grid + pose types and the binary
// grid file format with its JSON pose sidecar.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occluplan/bitmask.hpp"
#include "occluplan/core.hpp"

namespace occluplan {

// Reduced palette. UNKNOWN doubles as "no sensor return"; ROAD is the only
// traversable class.
enum class ClassId : std::uint8_t {
    UNKNOWN = 0,
    ROAD = 1,
    SIDEWALK = 2,
    BUILDING = 3,
    FENCE = 4,
    VEGETATION = 5,
    VEHICLE = 6,
    PEDESTRIAN = 7,
    OTHER = 8,
};

inline constexpr int kPaletteSize = 9;

inline bool class_in_palette(std::uint8_t raw) { return raw < kPaletteSize; }

inline ClassId class_from_raw(std::uint8_t raw) {
    if (!class_in_palette(raw)) {
        throw UndeclaredClassError("undeclared class id " + std::to_string(raw));
    }
    return static_cast<ClassId>(raw);
}

inline const char* class_name(ClassId c) {
    static constexpr std::array<const char*, kPaletteSize> names = {
        "UNKNOWN", "ROAD", "SIDEWALK", "BUILDING", "FENCE", "VEGETATION", "VEHICLE", "PEDESTRIAN", "OTHER"};
    return names[static_cast<std::size_t>(c)];
}

struct VehiclePose {
    double px = 0.0;  // cell-x, continuous
    double py = 0.0;  // cell-y, continuous
    double theta = 0.0;  // radians in [-pi, pi)

    void normalize() { theta = wrap_angle(theta); }
    Cell cell() const { return {static_cast<int>(std::floor(px)), static_cast<int>(std::floor(py))}; }

    friend bool operator==(const VehiclePose& a, const VehiclePose& b) {
        return a.px == b.px && a.py == b.py && a.theta == b.theta;
    }
};

class SemanticGrid {
public:
    SemanticGrid() = default;
    // resolution and origin are stored in f32, matching the file format,
    // so save/load round-trips are bit-exact
    SemanticGrid(int width, int height, double resolution = 0.2, double origin_x = 0.0, double origin_y = 0.0,
                 ClassId fill = ClassId::UNKNOWN)
        : width_(width),
          height_(height),
          resolution_(static_cast<float>(resolution)),
          origin_x_(static_cast<float>(origin_x)),
          origin_y_(static_cast<float>(origin_y)),
          cells_(static_cast<std::size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0) throw EmptyGridError("SemanticGrid: dimensions must be positive");
        if (resolution <= 0.0) throw InvalidArgumentError("SemanticGrid: resolution must be > 0");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }
    float resolution_f32() const { return resolution_; }
    float origin_x_f32() const { return origin_x_; }
    float origin_y_f32() const { return origin_y_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool in_bounds(const Cell& c) const { return in_bounds(c.x, c.y); }

    ClassId at(int x, int y) const { return cells_[idx(x, y)]; }
    ClassId at(const Cell& c) const { return at(c.x, c.y); }
    void set(int x, int y, ClassId v) { cells_[idx(x, y)] = v; }
    void set(const Cell& c, ClassId v) { set(c.x, c.y, v); }

    const std::vector<ClassId>& cells() const { return cells_; }

    std::size_t count(ClassId c) const {
        std::size_t n = 0;
        for (auto v : cells_) n += (v == c);
        return n;
    }

    friend bool operator==(const SemanticGrid& a, const SemanticGrid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.resolution_ == b.resolution_ &&
               a.origin_x_ == b.origin_x_ && a.origin_y_ == b.origin_y_ && a.cells_ == b.cells_;
    }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    float resolution_ = 0.2f;
    float origin_x_ = 0.0f;
    float origin_y_ = 0.0f;
    std::vector<ClassId> cells_;
};

inline constexpr int kDefaultGridSize = 256;     // cells
inline constexpr double kDefaultResolution = 0.2;  // meters per cell

struct Frame {
    SemanticGrid grid;
    VehiclePose pose;
    std::int64_t frame_id = 0;
};

// ---- operations ----

/// Rewrites every cell whose class is in `classes` to UNKNOWN.
inline SemanticGrid remove_classes(const SemanticGrid& grid, const std::set<ClassId>& classes) {
    SemanticGrid out = grid;
    if (classes.empty()) return out;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            if (classes.count(out.at(x, y))) out.set(x, y, ClassId::UNKNOWN);
        }
    }
    return out;
}

/// Mask of cells whose class equals `cls`.
inline BitMask class_mask(const SemanticGrid& grid, ClassId cls) {
    BitMask mask(grid.width(), grid.height());
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            if (grid.at(x, y) == cls) mask.set(x, y);
        }
    }
    return mask;
}

// ---- file I/O ----
//
// Grid file, little-endian:
//   magic "OGRD" | u16 version=1 | u32 width | u32 height
//   | f32 resolution | f32 origin_x | f32 origin_y
//   | width*height bytes of class ids, row-major
// Pose sidecar: <basename>.json with {frame_id, pose:{px,py,theta}}.

namespace detail {

inline constexpr char kGridMagic[4] = {'O', 'G', 'R', 'D'};
inline constexpr std::uint16_t kGridVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(sizeof(T) <= 8);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw FormatError("grid file: truncated header");
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& grid_path) {
    std::filesystem::path p = grid_path;
    p.replace_extension(".json");
    return p;
}

}  // namespace detail

/// Writes the binary raster only (no pose sidecar).
inline void save_grid(const SemanticGrid& grid, const std::filesystem::path& path) {
    if (grid.empty()) throw EmptyGridError("save_grid: empty grid");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_grid: cannot open " + path.string());
    os.write(detail::kGridMagic, 4);
    detail::write_le<std::uint16_t>(os, detail::kGridVersion);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.width()));
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.height()));
    detail::write_le<float>(os, grid.resolution_f32());
    detail::write_le<float>(os, grid.origin_x_f32());
    detail::write_le<float>(os, grid.origin_y_f32());
    for (ClassId c : grid.cells()) {
        const auto raw = static_cast<std::uint8_t>(c);
        os.write(reinterpret_cast<const char*>(&raw), 1);
    }
    if (!os) throw IoError("save_grid: write failed for " + path.string());
}

inline SemanticGrid load_grid(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_grid: missing file " + path.string());

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, detail::kGridMagic, 4) != 0) {
        throw FormatError("load_grid: bad magic in " + path.string());
    }
    const auto version = detail::read_le<std::uint16_t>(is);
    if (version != detail::kGridVersion) {
        throw FormatError("load_grid: unsupported version " + std::to_string(version));
    }
    const auto width = detail::read_le<std::uint32_t>(is);
    const auto height = detail::read_le<std::uint32_t>(is);
    const auto resolution = detail::read_le<float>(is);
    const auto origin_x = detail::read_le<float>(is);
    const auto origin_y = detail::read_le<float>(is);
    if (width == 0 || height == 0) throw FormatError("load_grid: zero dimension");
    if (!(resolution > 0.0f)) throw FormatError("load_grid: non-positive resolution");

    SemanticGrid grid(static_cast<int>(width), static_cast<int>(height), resolution, origin_x, origin_y);
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(width) * height);
    is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!is) throw FormatError("load_grid: truncated payload in " + path.string());
    std::size_t i = 0;
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            grid.set(static_cast<int>(x), static_cast<int>(y), class_from_raw(payload[i++]));
        }
    }
    return grid;
}

inline void save_frame(const Frame& frame, const std::filesystem::path& path) {
    if (frame.grid.empty()) throw EmptyGridError("save_frame: empty grid");
    if (!frame.grid.in_bounds(frame.pose.cell())) {
        throw InvalidArgumentError("save_frame: pose outside grid bounds");
    }
    save_grid(frame.grid, path);

    nlohmann::json side;
    side["frame_id"] = frame.frame_id;
    side["pose"] = {{"px", frame.pose.px}, {"py", frame.pose.py}, {"theta", frame.pose.theta}};
    std::ofstream js(detail::sidecar_path(path));
    if (!js) throw IoError("save_frame: cannot open sidecar for " + path.string());
    js << side.dump(2) << "\n";
}

inline Frame load_frame(const std::filesystem::path& path) {
    Frame frame;
    frame.grid = load_grid(path);

    const auto side_path = detail::sidecar_path(path);
    std::ifstream js(side_path);
    if (!js) throw IoError("load_frame: missing sidecar " + side_path.string());
    nlohmann::json side;
    try {
        js >> side;
        frame.frame_id = side.at("frame_id").get<std::int64_t>();
        frame.pose.px = side.at("pose").at("px").get<double>();
        frame.pose.py = side.at("pose").at("py").get<double>();
        frame.pose.theta = side.at("pose").at("theta").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_frame: malformed sidecar " + side_path.string() + ": " + e.what());
    }
    frame.pose.normalize();
    if (!frame.grid.in_bounds(frame.pose.cell())) {
        throw FormatError("load_frame: pose outside grid bounds in " + side_path.string());
    }
    return frame;
}

}  // namespace occluplan
