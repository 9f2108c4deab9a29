#pragma once

// On-disk formats.
//
// Trajectory file:  "FDDT1 <header_bytes>\n" + one-line JSON header
//   (channel names, sample rate, label, type, id, sample count) followed by
//   channel-major little-endian float32 data.
// Model container: "FDDC1 <kind> <header_bytes>\n" + one-line JSON header
//   (version, kind-specific metadata, tensor directory) followed by the
//   tensors as little-endian float32 in directory order.
// Dataset manifest: plain JSON.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdd/common.hpp"
#include "fdd/sim.hpp"

namespace fdd::io {

using json = nlohmann::json;

struct VersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kTrajectoryVersion = 1;
inline constexpr int kContainerVersion = 1;

namespace detail {

inline void write_f32(std::ostream& os, const float* data, std::size_t n) {
    // little-endian host assumed; static_assert guards the float width
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(n * sizeof(float)));
}

inline void read_f32(std::istream& is, float* data, std::size_t n) {
    is.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw ArtifactError("truncated float payload");
}

inline std::pair<std::string, json> read_magic_header(std::istream& is,
                                                      const std::string& magic) {
    std::string line;
    if (!std::getline(is, line)) throw ArtifactError("empty file");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag.rfind(magic.substr(0, 4), 0) != 0)
        throw ArtifactError("not a recognized artifact file");
    if (tag != magic)
        throw VersionError("unsupported artifact version: " + tag);
    std::string kind;
    std::size_t header_bytes = 0;
    if (magic == "FDDC1") ls >> kind;
    ls >> header_bytes;
    if (!ls) throw ArtifactError("malformed artifact header line");
    std::string header(header_bytes, '\0');
    is.read(header.data(), static_cast<std::streamsize>(header_bytes));
    if (!is) throw ArtifactError("truncated artifact header");
    return {kind, json::parse(header)};
}

} // namespace detail

// ---- trajectory files ----

inline void save_trajectory(const sim::Trajectory& t, const std::string& path) {
    json h;
    h["channels"] = sim::channel_names();
    h["sample_rate"] = t.sample_rate;
    h["label"] = t.label;
    h["traj_type"] = static_cast<int>(t.traj_type);
    h["id"] = t.id;
    h["n_samples"] = t.length();
    std::string hs = h.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArtifactError("cannot open for writing: " + path);
    os << "FDDT" << kTrajectoryVersion << " " << hs.size() << "\n" << hs;
    for (const auto& ch : t.channels)
        detail::write_f32(os, ch.data(), ch.size());
}

inline sim::Trajectory load_trajectory(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot open: " + path);
    auto [kind, h] = detail::read_magic_header(is, "FDDT1");
    (void)kind;
    sim::Trajectory t;
    t.sample_rate = h.at("sample_rate").get<double>();
    t.label = h.at("label").get<int>();
    t.traj_type = static_cast<sim::TrajType>(h.at("traj_type").get<int>());
    t.id = h.at("id").get<std::int64_t>();
    auto n = h.at("n_samples").get<std::size_t>();
    auto names = h.at("channels").get<std::vector<std::string>>();
    if (names.size() != static_cast<std::size_t>(sim::kNumChannels))
        throw ArtifactError("unexpected channel count in " + path);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] != sim::channel_names()[i])
            throw ArtifactError("channel name mismatch in " + path);
    t.channels.assign(static_cast<std::size_t>(sim::kNumChannels),
                      std::vector<float>(n));
    for (auto& ch : t.channels) detail::read_f32(is, ch.data(), n);
    return t;
}

inline void export_trajectory_csv(const sim::Trajectory& t,
                                  const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot open for writing: " + path);
    os << "time_s";
    for (const auto& n : sim::channel_names()) os << "," << n;
    os << "\n";
    const std::size_t n = t.length();
    for (std::size_t i = 0; i < n; ++i) {
        os << static_cast<double>(i) / t.sample_rate;
        for (const auto& ch : t.channels) os << "," << ch[i];
        os << "\n";
    }
}

// ---- model container ----

struct NamedTensor {
    std::string name;
    std::vector<float> data;
};

inline void save_container(const std::string& path, const std::string& kind,
                           json meta, const std::vector<NamedTensor>& tensors) {
    json dir = json::array();
    for (const auto& t : tensors)
        dir.push_back({{"name", t.name}, {"count", t.data.size()}});
    json h;
    h["version"] = kContainerVersion;
    h["meta"] = std::move(meta);
    h["tensors"] = dir;
    std::string hs = h.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArtifactError("cannot open for writing: " + path);
    os << "FDDC" << kContainerVersion << " " << kind << " " << hs.size() << "\n"
       << hs;
    for (const auto& t : tensors)
        detail::write_f32(os, t.data.data(), t.data.size());
}

struct Container {
    json meta;
    std::vector<NamedTensor> tensors;

    const NamedTensor& tensor(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw ArtifactError("missing tensor: " + name);
    }
};

inline Container load_container(const std::string& path,
                                const std::string& expected_kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot open: " + path);
    auto [kind, h] = detail::read_magic_header(is, "FDDC1");
    if (kind != expected_kind)
        throw ArtifactError("expected " + expected_kind + " container, found " + kind);
    if (h.at("version").get<int>() != kContainerVersion)
        throw VersionError("unsupported container version");
    Container c;
    c.meta = h.at("meta");
    for (const auto& d : h.at("tensors")) {
        NamedTensor t;
        t.name = d.at("name").get<std::string>();
        t.data.resize(d.at("count").get<std::size_t>());
        detail::read_f32(is, t.data.data(), t.data.size());
        c.tensors.push_back(std::move(t));
    }
    return c;
}

// ---- helpers ----

inline std::uint64_t file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot open: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
    }
    return h;
}

inline void save_json(const json& j, const std::string& path, int indent = 2) {
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot open for writing: " + path);
    os << j.dump(indent) << "\n";
}

inline json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot open: " + path);
    return json::parse(is);
}

} // namespace fdd::io
