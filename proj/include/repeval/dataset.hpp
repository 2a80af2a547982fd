#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "repeval/rng.hpp"

namespace repeval {

enum class DatasetFormat { binary, csv };

/// A labeled collection of fixed-width representation vectors.
///
/// Invariants (checked by validate()): n >= 1, d >= 1, num_classes >= 2,
/// features.size() == n*d with every value finite, labels.size() == n with
/// every label < num_classes, oracle_loss >= 0 when present.
struct Dataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint32_t num_classes = 0;
    std::vector<float> features;        // row-major, n*d
    std::vector<std::uint32_t> labels;  // length n
    std::string name;
    // Bayes loss of the generating task in nats, known for synthetic tasks.
    std::optional<double> oracle_loss;

    std::span<const float> row(std::size_t i) const {
        return {features.data() + i * d, d};
    }

    void validate() const;  // throws ValidationError with the offending index
};

/// Per-column statistics captured on one dataset so the same affine map can
/// be replayed on another (training pool stats applied to a holdout).
struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation
};

Dataset load_dataset(const std::string& path, DatasetFormat format);
void save_dataset(const Dataset& ds, const std::string& path);

/// Guesses the format from the file extension: ".csv" means CSV,
/// anything else means the binary container.
DatasetFormat format_from_path(const std::string& path);

/// Zero mean, unit variance per feature column. Columns with zero variance
/// become all zeros. Returns the transformed dataset and the stats used.
std::pair<Dataset, NormalizationStats> normalize_features(const Dataset& ds);

/// Replays previously captured stats on another dataset with the same width.
Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats);

/// Samples n rows with replacement. n may exceed ds.n.
Dataset bootstrap_subsample(const Dataset& ds, std::size_t n, RngStream stream);

/// Shuffles row indices with the given stream and takes the first
/// ceil(fraction * n) rows as holdout, the rest as pool.
/// Returns {pool, holdout}.
std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction,
                                          RngStream stream);

/// Content hash covering shape, classes, features, labels, and name.
std::string dataset_fingerprint(const Dataset& ds);

}  // namespace repeval
