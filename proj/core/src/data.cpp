#include "pilu/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "pilu/rng.hpp"

namespace pilu {

namespace fs = std::filesystem;

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "unknown";
}

const std::vector<std::uint32_t>& Dataset::split(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Val: return val;
        case Split::Test: return test;
    }
    return train;
}

template <typename T>
Tensor<T> Dataset::images(std::span<const std::uint32_t> indices) const {
    Tensor<T> out({indices.size(), kCifarSide, kCifarSide, kCifarChannels});
    T* dst = out.raw();
    for (const auto idx : indices) {
        if (idx >= size()) throw std::out_of_range("dataset index " + std::to_string(idx));
        const std::uint8_t* src = pixels.data() + std::size_t{idx} * kCifarPixels;
        for (std::size_t p = 0; p < kCifarPixels; ++p) *dst++ = static_cast<T>(src[p]) / T{255};
    }
    return out;
}

template <typename T>
Tensor<T> Dataset::images() const {
    std::vector<std::uint32_t> all(size());
    std::iota(all.begin(), all.end(), 0u);
    return images<T>(all);
}

std::vector<std::uint16_t> Dataset::labels_of(std::span<const std::uint32_t> indices) const {
    std::vector<std::uint16_t> out;
    out.reserve(indices.size());
    for (const auto idx : indices) out.push_back(labels.at(idx));
    return out;
}

template Tensor<float> Dataset::images<float>(std::span<const std::uint32_t>) const;
template Tensor<double> Dataset::images<double>(std::span<const std::uint32_t>) const;
template Tensor<float> Dataset::images<float>() const;
template Tensor<double> Dataset::images<double>() const;

std::size_t parse_cifar_records(std::span<const std::uint8_t> bytes, CifarVariant variant, Dataset& out,
                                std::string_view source) {
    const bool fine = variant == CifarVariant::Cifar100;
    const std::size_t record = fine ? kCifar100RecordBytes : kCifar10RecordBytes;
    const std::size_t classes = fine ? 100 : 10;
    if (bytes.size() % record != 0) {
        throw DataError(std::string(source) + ": size " + std::to_string(bytes.size()) +
                        " is not a multiple of the " + std::to_string(record) + "-byte record");
    }
    const std::size_t count = bytes.size() / record;
    const std::size_t plane = kCifarSide * kCifarSide;
    out.pixels.reserve(out.pixels.size() + count * kCifarPixels);
    out.labels.reserve(out.labels.size() + count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::uint8_t* rec = bytes.data() + r * record;
        const std::uint8_t label = fine ? rec[1] : rec[0];
        if (label >= classes) {
            throw DataError(std::string(source) + ": record " + std::to_string(r) + " has label " +
                            std::to_string(label) + " (expected < " + std::to_string(classes) + ")");
        }
        const std::uint8_t* planes = rec + (fine ? 2 : 1);
        const std::size_t base = out.pixels.size();
        out.pixels.resize(base + kCifarPixels);
        std::uint8_t* dst = out.pixels.data() + base;
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t c = 0; c < kCifarChannels; ++c) dst[p * kCifarChannels + c] = planes[c * plane + p];
        }
        out.labels.push_back(label);
    }
    return count;
}

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing data file " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::uint8_t> bytes(size);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw DataError("failed to read " + path.string());
    }
    return bytes;
}

fs::path resolve_dir(const fs::path& dir, const std::string& subdir, const std::string& probe) {
    if (fs::exists(dir / probe)) return dir;
    if (fs::exists(dir / subdir / probe)) return dir / subdir;
    throw DataError("no " + probe + " under " + dir.string() + " or " + (dir / subdir).string());
}

void assign_cifar_splits(Dataset& ds, std::size_t train_total, std::size_t validation_count) {
    if (validation_count >= train_total) {
        throw DataError("validation split of " + std::to_string(validation_count) +
                        " leaves no training data out of " + std::to_string(train_total));
    }
    const std::size_t cut = train_total - validation_count;
    ds.train.resize(cut);
    std::iota(ds.train.begin(), ds.train.end(), 0u);
    ds.val.resize(validation_count);
    std::iota(ds.val.begin(), ds.val.end(), static_cast<std::uint32_t>(cut));
    ds.test.resize(ds.size() - train_total);
    std::iota(ds.test.begin(), ds.test.end(), static_cast<std::uint32_t>(train_total));
}

}  // namespace

Dataset load_cifar10(const fs::path& dir, std::size_t validation_count) {
    const fs::path root = resolve_dir(dir, "cifar-10-batches-bin", "data_batch_1.bin");
    Dataset ds;
    ds.name = "cifar10";
    ds.num_classes = 10;
    for (int b = 1; b <= 5; ++b) {
        const auto path = root / ("data_batch_" + std::to_string(b) + ".bin");
        parse_cifar_records(read_file(path), CifarVariant::Cifar10, ds, path.string());
    }
    const std::size_t train_total = ds.size();
    const auto test_path = root / "test_batch.bin";
    parse_cifar_records(read_file(test_path), CifarVariant::Cifar10, ds, test_path.string());
    assign_cifar_splits(ds, train_total, validation_count);
    return ds;
}

Dataset load_cifar100(const fs::path& dir, std::size_t validation_count) {
    const fs::path root = resolve_dir(dir, "cifar-100-binary", "train.bin");
    Dataset ds;
    ds.name = "cifar100";
    ds.num_classes = 100;
    const auto train_path = root / "train.bin";
    parse_cifar_records(read_file(train_path), CifarVariant::Cifar100, ds, train_path.string());
    const std::size_t train_total = ds.size();
    const auto test_path = root / "test.bin";
    parse_cifar_records(read_file(test_path), CifarVariant::Cifar100, ds, test_path.string());
    assign_cifar_splits(ds, train_total, validation_count);
    return ds;
}

template <typename T>
Tensor<T> one_hot(std::span<const std::uint16_t> labels, std::size_t num_classes) {
    Tensor<T> out({labels.size(), num_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw std::out_of_range("one_hot: label " + std::to_string(labels[i]) + " >= " +
                                    std::to_string(num_classes));
        }
        out[i * num_classes + labels[i]] = T{1};
    }
    return out;
}

template Tensor<float> one_hot<float>(std::span<const std::uint16_t>, std::size_t);
template Tensor<double> one_hot<double>(std::span<const std::uint16_t>, std::size_t);

Dataset make_synthetic(std::size_t n, std::size_t num_classes, std::uint64_t seed) {
    if (num_classes < 2 || n < num_classes) throw std::invalid_argument("make_synthetic: need n >= k >= 2");
    Rng rng = make_stream(seed, Stream::Data);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.2, 0.8);

    // Each prototype: a class colour plus a fixed spatial texture.
    std::vector<std::vector<double>> prototypes(num_classes, std::vector<double>(kCifarPixels));
    for (auto& proto : prototypes) {
        const double colour[3] = {uniform(rng), uniform(rng), uniform(rng)};
        for (std::size_t p = 0; p < kCifarPixels; ++p) proto[p] = colour[p % 3] + 0.15 * normal(rng);
    }

    Dataset ds;
    ds.name = "synthetic";
    ds.num_classes = num_classes;
    ds.pixels.resize(n * kCifarPixels);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % num_classes;
        ds.labels[i] = static_cast<std::uint16_t>(label);
        std::uint8_t* dst = ds.pixels.data() + i * kCifarPixels;
        for (std::size_t p = 0; p < kCifarPixels; ++p) {
            const double v = std::clamp(prototypes[label][p] + 0.1 * normal(rng), 0.0, 1.0);
            dst[p] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    const std::size_t n_train = n * 8 / 10, n_val = n / 10;
    ds.train.resize(n_train);
    std::iota(ds.train.begin(), ds.train.end(), 0u);
    ds.val.resize(n_val);
    std::iota(ds.val.begin(), ds.val.end(), static_cast<std::uint32_t>(n_train));
    ds.test.resize(n - n_train - n_val);
    std::iota(ds.test.begin(), ds.test.end(), static_cast<std::uint32_t>(n_train + n_val));
    return ds;
}

Dataset subset(const Dataset& dataset, std::size_t train_n, std::uint64_t seed) {
    if (train_n > dataset.train.size()) {
        throw std::invalid_argument("subset: requested " + std::to_string(train_n) + " of " +
                                    std::to_string(dataset.train.size()) + " training examples");
    }
    Dataset out = dataset;
    if (train_n == dataset.train.size()) return out;

    std::vector<std::vector<std::uint32_t>> by_class(dataset.num_classes);
    for (const auto idx : dataset.train) by_class[dataset.labels[idx]].push_back(idx);

    // Largest-remainder quotas proportional to class frequency.
    const std::size_t total = dataset.train.size();
    std::vector<std::size_t> quota(by_class.size());
    std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder numerator, class)
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const std::size_t scaled = by_class[c].size() * train_n;
        quota[c] = scaled / total;
        assigned += quota[c];
        remainders.emplace_back(scaled % total, c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < train_n; ++i, ++assigned) ++quota[remainders[i].second];

    Rng rng = make_stream(seed, Stream::Sampling);
    out.train.clear();
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
    std::sort(out.train.begin(), out.train.end());
    return out;
}

std::vector<std::size_t> class_histogram(const Dataset& dataset, Split split) {
    std::vector<std::size_t> counts(dataset.num_classes, 0);
    for (const auto idx : dataset.split(split)) ++counts[dataset.labels[idx]];
    return counts;
}

}  // namespace pilu
