#include "pilu/checkpoint.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pilu {

namespace {

constexpr std::array<char, 8> kMagic{'P', 'I', 'L', 'U', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put(std::ostream& out, U value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename U>
U get(std::istream& in, const std::filesystem::path& path) {
    U value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) {
        throw std::runtime_error(path.string() + ": truncated checkpoint");
    }
    return value;
}

std::string get_string(std::istream& in, std::size_t n, const std::filesystem::path& path) {
    if (n > (std::size_t{1} << 30)) throw std::runtime_error(path.string() + ": corrupt length");
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
        throw std::runtime_error(path.string() + ": truncated checkpoint");
    }
    return s;
}

}  // namespace

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path, const std::string& metadata) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, sizeof(T));
    put<std::uint64_t>(out, metadata.size());
    out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
    const auto params = model.parameters();
    put<std::uint64_t>(out, params.size());
    for (const auto* p : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
        for (const auto d : p->value.shape()) put<std::uint64_t>(out, d);
        out.write(reinterpret_cast<const char*>(p->value.raw()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(T)));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename T>
std::string load_checkpoint(Model<T>& model, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error(path.string() + ": not a checkpoint");
    }
    if (get<std::uint32_t>(in, path) != kVersion) throw std::runtime_error(path.string() + ": unsupported version");
    if (get<std::uint32_t>(in, path) != sizeof(T)) throw std::runtime_error(path.string() + ": scalar type mismatch");
    std::string metadata = get_string(in, get<std::uint64_t>(in, path), path);

    auto params = model.parameters();
    if (get<std::uint64_t>(in, path) != params.size()) {
        throw std::runtime_error(path.string() + ": tensor count does not match the model");
    }
    for (auto* p : params) {
        const auto name = get_string(in, get<std::uint32_t>(in, path), path);
        if (name != p->name) throw std::runtime_error(path.string() + ": expected tensor " + p->name + ", found " + name);
        const auto rank = get<std::uint32_t>(in, path);
        Shape shape(rank);
        for (auto& d : shape) d = get<std::uint64_t>(in, path);
        if (shape != p->value.shape()) {
            throw std::runtime_error(path.string() + ": shape mismatch for " + name + ": " + shape_to_string(shape));
        }
        if (!in.read(reinterpret_cast<char*>(p->value.raw()), static_cast<std::streamsize>(p->value.size() * sizeof(T)))) {
            throw std::runtime_error(path.string() + ": truncated checkpoint");
        }
    }
    return metadata;
}

template void save_checkpoint<float>(const Model<float>&, const std::filesystem::path&, const std::string&);
template void save_checkpoint<double>(const Model<double>&, const std::filesystem::path&, const std::string&);
template std::string load_checkpoint<float>(Model<float>&, const std::filesystem::path&);
template std::string load_checkpoint<double>(Model<double>&, const std::filesystem::path&);

}  // namespace pilu
