#include "mtcd/nn/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include <fmt/format.h>

namespace mtcd::nn {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'C', 'D', 'W', 'T', '0', '1'};

struct BlobEntry {
    std::array<int, 4> shape{};
    std::vector<double> values;
};

template <typename V>
void put(std::ofstream& out, V v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename V>
V get(std::ifstream& in, const std::filesystem::path& path) {
    V v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw LoadError("truncated weights file: " + path.string());
    return v;
}

template <typename T>
void write_tensor(std::ofstream& out, const std::string& name, const Tensor<T>& t) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (int d : t.shape()) put<std::int32_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
}

template <typename S>
void read_values(std::ifstream& in, std::size_t n, std::vector<double>& dst,
                 const std::filesystem::path& path) {
    std::vector<S> raw(n);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(S))))
        throw LoadError("truncated weights file: " + path.string());
    dst.assign(raw.begin(), raw.end());
}

std::map<std::string, BlobEntry> read_blob(const std::filesystem::path& path, int& scalar_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open weights file: " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw LoadError("not a weights file: " + path.string());
    scalar_bytes = static_cast<int>(get<std::uint32_t>(in, path));
    if (scalar_bytes != 4 && scalar_bytes != 8)
        throw LoadError("unsupported scalar size in " + path.string());
    const auto count = get<std::uint32_t>(in, path);
    std::map<std::string, BlobEntry> entries;
    for (std::uint32_t e = 0; e < count; ++e) {
        const auto len = get<std::uint32_t>(in, path);
        if (len > 4096) throw LoadError("corrupt weights file: " + path.string());
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw LoadError("truncated weights file: " + path.string());
        BlobEntry entry;
        std::size_t n = 1;
        for (auto& d : entry.shape) {
            d = get<std::int32_t>(in, path);
            if (d < 0) throw LoadError("corrupt weights file: " + path.string());
            n *= static_cast<std::size_t>(d);
        }
        if (scalar_bytes == 4)
            read_values<float>(in, n, entry.values, path);
        else
            read_values<double>(in, n, entry.values, path);
        entries.emplace(std::move(name), std::move(entry));
    }
    return entries;
}

} // namespace

template <typename T>
void save_weights(const std::filesystem::path& path, const StateRegistry<T>& reg) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write weights file: " + path.string());
    out.write(kMagic, 8);
    put<std::uint32_t>(out, sizeof(T));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(reg.parameters().size() + reg.buffers().size()));
    for (const auto& p : reg.parameters()) write_tensor(out, p.name, p.param->value);
    for (const auto& b : reg.buffers()) write_tensor(out, b.name, *b.tensor);
    if (!out) throw IoError("failed writing weights file: " + path.string());
}

template <typename T>
void load_weights(const std::filesystem::path& path, const StateRegistry<T>& reg,
                  const std::string& prefix) {
    // Widening to double and narrowing back is exact for both stored precisions.
    int scalar_bytes = 0;
    const auto blob = read_blob(path, scalar_bytes);

    std::vector<std::pair<std::string, Tensor<T>*>> wanted;
    for (const auto& p : reg.parameters())
        if (p.name.starts_with(prefix)) wanted.emplace_back(p.name, &p.param->value);
    for (const auto& b : reg.buffers())
        if (b.name.starts_with(prefix)) wanted.emplace_back(b.name, b.tensor);

    for (const auto& [name, t] : wanted) {
        auto it = blob.find(name);
        if (it == blob.end()) throw LoadError(fmt::format("{}: missing tensor '{}'", path.string(), name));
        if (it->second.shape != t->shape())
            throw LoadError(fmt::format("{}: tensor '{}' has shape {}, model expects {}", path.string(),
                                        name, shape_string(it->second.shape), shape_string(t->shape())));
    }
    if (prefix.empty() && wanted.size() != blob.size())
        throw LoadError(fmt::format("{}: holds {} tensors, model has {}", path.string(), blob.size(),
                                    wanted.size()));

    for (const auto& [name, t] : wanted) {
        const auto& values = blob.at(name).values;
        for (std::size_t k = 0; k < values.size(); ++k) (*t)[k] = static_cast<T>(values[k]);
    }
}

template <typename T>
std::string weights_digest(const StateRegistry<T>& reg) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& p : reg.parameters()) {
        mix(p.name.data(), p.name.size());
        mix(p.param->value.data(), p.param->value.size() * sizeof(T));
    }
    for (const auto& b : reg.buffers()) {
        mix(b.name.data(), b.name.size());
        mix(b.tensor->data(), b.tensor->size() * sizeof(T));
    }
    return fmt::format("{:016x}", h);
}

template void save_weights(const std::filesystem::path&, const StateRegistry<float>&);
template void save_weights(const std::filesystem::path&, const StateRegistry<double>&);
template void load_weights(const std::filesystem::path&, const StateRegistry<float>&, const std::string&);
template void load_weights(const std::filesystem::path&, const StateRegistry<double>&, const std::string&);
template std::string weights_digest(const StateRegistry<float>&);
template std::string weights_digest(const StateRegistry<double>&);

} // namespace mtcd::nn
