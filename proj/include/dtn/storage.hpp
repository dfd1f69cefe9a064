#pragma once

// Disk-backed storage for MPS, MPO and environment chains. Each tensor goes
// to its own file so single sites load without touching the rest:
//
//   magic "DTNS1" (5 bytes) | u8 scalar tag (0 = real64, 1 = complex64 pair)
//   | u32 rank | u64 dims[rank] | payload, little-endian, leftmost fastest
//
// Files carry the ".dmrjulia" extension as a deletion-convenience marker. A
// store writes a manifest listing the site files plus, for MPS stores, the
// orthogonality center.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dtn/env.hpp"
#include "dtn/error.hpp"
#include "dtn/mpo.hpp"
#include "dtn/mps.hpp"
#include "dtn/tensor.hpp"

namespace dtn {

enum class ScalarTag : std::uint8_t { real64 = 0, complex64 = 1 };

template <class T>
constexpr ScalarTag scalar_tag_of() {
    return std::is_same_v<T, double> ? ScalarTag::real64 : ScalarTag::complex64;
}

struct DiskStore {
    enum class Kind { mps, mpo, env };
    Kind kind = Kind::mps;
    ScalarTag tag = ScalarTag::real64;
    int oc = 0; // meaningful for MPS stores only
    std::vector<std::string> paths;

    int size() const { return static_cast<int>(paths.size()); }
};

namespace detail {

inline constexpr char kMagic[5] = {'D', 'T', 'N', 'S', '1'};

template <class V>
void write_raw(std::ofstream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <class V>
V read_raw(std::ifstream& is) {
    V v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    return v;
}

} // namespace detail

template <class T>
void save_tensor(const Tensor<T>& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("save_tensor: cannot open " + path);
    os.write(detail::kMagic, 5);
    detail::write_raw(os, static_cast<std::uint8_t>(scalar_tag_of<T>()));
    detail::write_raw(os, static_cast<std::uint32_t>(t.rank()));
    for (index_t d : t.dims) detail::write_raw(os, static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(T)));
    if (!os) throw io_error("save_tensor: write failed for " + path);
}

template <class T>
Tensor<T> load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("load_tensor: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::string(magic, 5) != std::string(detail::kMagic, 5))
        throw io_error("load_tensor: bad magic in " + path);
    const auto tag = static_cast<ScalarTag>(detail::read_raw<std::uint8_t>(is));
    if (tag != scalar_tag_of<T>())
        throw io_error("load_tensor: scalar type tag mismatch in " + path);
    const auto rank = detail::read_raw<std::uint32_t>(is);
    std::vector<index_t> dims(rank);
    for (auto& d : dims) d = static_cast<index_t>(detail::read_raw<std::uint64_t>(is));
    Tensor<T> t(dims.empty() ? std::vector<index_t>{} : dims);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(T)));
    if (!is) throw io_error("load_tensor: truncated payload in " + path);
    return t;
}

namespace detail {

inline std::string site_filename(const std::string& dir, const std::string& base, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_%04d.dmrjulia", i);
    return dir + "/" + base + buf;
}

inline std::string kind_name(DiskStore::Kind k) {
    switch (k) {
        case DiskStore::Kind::mps: return "mps";
        case DiskStore::Kind::mpo: return "mpo";
        case DiskStore::Kind::env: return "env";
    }
    return "?";
}

inline DiskStore::Kind kind_from(const std::string& s) {
    if (s == "mps") return DiskStore::Kind::mps;
    if (s == "mpo") return DiskStore::Kind::mpo;
    if (s == "env") return DiskStore::Kind::env;
    throw io_error("manifest: unknown store kind '" + s + "'");
}

inline void write_manifest(const DiskStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw io_error("manifest: cannot open " + path);
    os << "DTNS-STORE v1\n";
    os << "kind " << kind_name(store.kind) << "\n";
    os << "scalar " << (store.tag == ScalarTag::real64 ? "real64" : "complex64") << "\n";
    os << "sites " << store.paths.size() << "\n";
    os << "oc " << store.oc << "\n";
    for (const auto& p : store.paths) os << p << "\n";
    if (!os) throw io_error("manifest: write failed for " + path);
}

} // namespace detail

template <class T, class Chain>
DiskStore save_chain(const Chain& chain, const std::string& dir, const std::string& base,
                     DiskStore::Kind kind, int oc) {
    std::filesystem::create_directories(dir);
    DiskStore store;
    store.kind = kind;
    store.tag = scalar_tag_of<T>();
    store.oc = oc;
    for (index_t i = 0; i < chain.size(); ++i) {
        const auto path = detail::site_filename(dir, base, static_cast<int>(i));
        save_tensor(chain[i], path);
        store.paths.push_back(path);
    }
    detail::write_manifest(store, dir + "/" + base + ".manifest");
    return store;
}

template <class T>
DiskStore disk_save(const Mps<T>& psi, const std::string& dir, const std::string& base = "psi") {
    return save_chain<T>(psi.tensors, dir, base, DiskStore::Kind::mps, psi.oc);
}

template <class T>
DiskStore disk_save(const Mpo<T>& mpo, const std::string& dir, const std::string& base = "mpo") {
    return save_chain<T>(mpo.tensors, dir, base, DiskStore::Kind::mpo, 0);
}

template <class T>
DiskStore disk_save(const Environment<T>& env, const std::string& dir,
                    const std::string& base = "env") {
    return save_chain<T>(env.tensors, dir, base, DiskStore::Kind::env, 0);
}

inline DiskStore open_store(const std::string& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw io_error("open_store: cannot open " + manifest_path);
    std::string header;
    std::getline(is, header);
    if (header != "DTNS-STORE v1") throw io_error("open_store: bad manifest header");
    DiskStore store;
    std::string key, value;
    std::size_t nsites = 0;
    for (int i = 0; i < 4; ++i) {
        is >> key >> value;
        if (key == "kind") store.kind = detail::kind_from(value);
        else if (key == "scalar") store.tag = value == "real64" ? ScalarTag::real64 : ScalarTag::complex64;
        else if (key == "sites") nsites = std::stoul(value);
        else if (key == "oc") store.oc = std::stoi(value);
        else throw io_error("open_store: unexpected manifest key '" + key + "'");
    }
    std::getline(is, key); // consume end of line
    for (std::size_t i = 0; i < nsites; ++i) {
        std::string line;
        if (!std::getline(is, line) || line.empty()) throw io_error("open_store: manifest truncated");
        store.paths.push_back(line);
    }
    return store;
}

// Load one site without touching the others.
template <class T>
Tensor<T> disk_load(const DiskStore& store, int site) {
    if (site < 0 || site >= store.size()) throw value_error("disk_load: site out of range");
    return load_tensor<T>(store.paths[static_cast<index_t>(site)]);
}

template <class T>
Mps<T> load_mps(const DiskStore& store) {
    if (store.kind != DiskStore::Kind::mps) throw io_error("load_mps: store does not hold an MPS");
    Mps<T> psi;
    psi.oc = store.oc;
    for (int i = 0; i < store.size(); ++i) psi.tensors.push_back(disk_load<T>(store, i));
    return psi;
}

template <class T>
Mpo<T> load_mpo(const DiskStore& store) {
    if (store.kind != DiskStore::Kind::mpo) throw io_error("load_mpo: store does not hold an MPO");
    Mpo<T> mpo;
    for (int i = 0; i < store.size(); ++i) mpo.tensors.push_back(disk_load<T>(store, i));
    return mpo;
}

template <class T>
Environment<T> load_env(const DiskStore& store) {
    if (store.kind != DiskStore::Kind::env) throw io_error("load_env: store does not hold environments");
    Environment<T> env;
    for (int i = 0; i < store.size(); ++i) env.tensors.push_back(disk_load<T>(store, i));
    return env;
}

// ---------------------------------------------------------------------------
// disk-backed MPS usable directly by the DMRG engine

template <class T>
struct DiskMps {
    using scalar = T;

    DiskStore store;
    int oc = 0;

    int size() const { return store.size(); }

    Tensor<T> get(int i) const { return disk_load<T>(store, i); }
    void set(int i, const Tensor<T>& t) { save_tensor(t, store.paths[static_cast<index_t>(i)]); }

    void sync_manifest(const std::string& manifest_path) const {
        DiskStore s = store;
        s.oc = oc;
        detail::write_manifest(s, manifest_path);
    }
};

template <class T>
DiskMps<T> disk_mps(const Mps<T>& psi, const std::string& dir, const std::string& base = "psi") {
    DiskMps<T> out;
    out.store = disk_save(psi, dir, base);
    out.oc = psi.oc;
    return out;
}

template <class T>
Tensor<T> sget(const DiskMps<T>& s, int i) {
    return s.get(i);
}

template <class T>
void sset(DiskMps<T>& s, int i, const Tensor<T>& t) {
    s.set(i, t);
}

} // namespace dtn
