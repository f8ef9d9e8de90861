#pragma once

// CIFAR-10/100 binary ingestion and a synthetic stand-in for fast tests.
//
// Pixels are kept as bytes (NHWC) and normalized by 255 when a batch is
// gathered, so a loaded CIFAR-10 pool costs 180 MB instead of 720 MB.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pilu/tensor.hpp"

namespace pilu {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Split { Train, Val, Test };
std::string_view to_string(Split split) noexcept;

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarChannels = 3;
inline constexpr std::size_t kCifarPixels = kCifarSide * kCifarSide * kCifarChannels;  // 3072
inline constexpr std::size_t kCifar10RecordBytes = 1 + kCifarPixels;                     // 3073
inline constexpr std::size_t kCifar100RecordBytes = 2 + kCifarPixels;                    // 3074
inline constexpr std::size_t kCifarValidationCount = 10000;

struct Dataset {
    std::string name;
    std::size_t num_classes = 0;
    /// N * 3072 bytes, each example (32, 32, 3) channels-last.
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint16_t> labels;
    std::vector<std::uint32_t> train, val, test;

    std::size_t size() const { return labels.size(); }
    const std::vector<std::uint32_t>& split(Split s) const;

    /// Normalized images (count, 32, 32, 3) with values byte / 255.
    template <typename T>
    Tensor<T> images(std::span<const std::uint32_t> indices) const;
    /// Every example of the pool, normalized.
    template <typename T>
    Tensor<T> images() const;

    std::vector<std::uint16_t> labels_of(std::span<const std::uint32_t> indices) const;
};

enum class CifarVariant { Cifar10, Cifar100 };

/// Parses raw CIFAR binary records and appends them to `out` (pixels
/// transposed from planar RGB to channels-last). Throws DataError when the
/// buffer is not a whole number of records or a label is out of range.
/// Returns the number of records parsed.
std::size_t parse_cifar_records(std::span<const std::uint8_t> bytes, CifarVariant variant, Dataset& out,
                                std::string_view source = "buffer");

/// Loads data_batch_1..5.bin and test_batch.bin from `dir` (or its
/// cifar-10-batches-bin subdirectory). The last `validation_count` training
/// images become the validation split.
Dataset load_cifar10(const std::filesystem::path& dir, std::size_t validation_count = kCifarValidationCount);

/// Loads train.bin and test.bin from `dir` (or its cifar-100-binary
/// subdirectory); the fine label is the class.
Dataset load_cifar100(const std::filesystem::path& dir, std::size_t validation_count = kCifarValidationCount);

/// One row per label with a single 1 at the label's column.
template <typename T>
Tensor<T> one_hot(std::span<const std::uint16_t> labels, std::size_t num_classes);

/// `n` images drawn from `num_classes` seeded prototypes plus noise; labels
/// are assigned round-robin. Splits are positional: 80% train, 10% val, 10% test.
Dataset make_synthetic(std::size_t n, std::size_t num_classes, std::uint64_t seed);

/// Seeded stratified sample of `train_n` training examples (per-class quotas
/// by largest remainder). Validation and test splits are untouched.
Dataset subset(const Dataset& dataset, std::size_t train_n, std::uint64_t seed);

/// Per-class example counts of a split.
std::vector<std::size_t> class_histogram(const Dataset& dataset, Split split);

}  // namespace pilu
