#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "descpol/errors.hpp"

namespace descpol {

/// Tuple of per-feature interval indices h = (h_1, ..., h_K). Indices are 1-based.
struct Condition {
    std::vector<std::size_t> index;

    Condition() = default;
    Condition(std::initializer_list<std::size_t> values) : index(values) {}
    explicit Condition(std::vector<std::size_t> values) : index(std::move(values)) {}

    std::size_t size() const noexcept { return index.size(); }
    std::size_t operator[](std::size_t k) const { return index[k]; }

    friend auto operator<=>(const Condition&, const Condition&) = default;
};

inline std::string to_string(const Condition& h) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < h.size(); ++k) os << (k ? "," : "") << h[k];
    os << ')';
    return os.str();
}

inline std::size_t shape_volume(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// Row-major position of `h` in a tensor of the given shape; the last feature varies fastest.
inline std::size_t flat_index(std::span<const std::size_t> shape, const Condition& h) {
    if (h.size() != shape.size())
        throw ShapeError("condition has " + std::to_string(h.size()) + " indices, expected " +
                         std::to_string(shape.size()));
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (h[k] < 1 || h[k] > shape[k])
            throw DomainError("condition index " + std::to_string(h[k]) + " outside 1.." +
                              std::to_string(shape[k]) + " for feature " + std::to_string(k));
        flat = flat * shape[k] + (h[k] - 1);
    }
    return flat;
}

inline Condition condition_at(std::span<const std::size_t> shape, std::size_t flat) {
    if (flat >= shape_volume(shape)) throw DomainError("flat condition index out of range");
    std::vector<std::size_t> index(shape.size());
    for (std::size_t k = shape.size(); k-- > 0;) {
        index[k] = flat % shape[k] + 1;
        flat /= shape[k];
    }
    return Condition(std::move(index));
}

enum class FeatureKind { continuous, discrete };

/// Partition of a single feature into H disjoint cells.
///
/// Continuous features are split into half-open intervals [lo, hi) over a closed domain
/// [lower, upper]; the last interval is closed so that every value of the domain belongs to
/// exactly one interval. Discrete features map each declared value to the cell that lists it.
class FeaturePartition {
public:
    static FeaturePartition uniform(std::size_t intervals, double lower = 0.0, double upper = 1.0) {
        if (intervals < 1) throw std::invalid_argument("uniform partition needs at least one interval");
        check_domain(lower, upper);
        FeaturePartition p;
        p.kind_ = FeatureKind::continuous;
        p.uniform_ = true;
        p.edges_.resize(intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i)
            p.edges_[i] = lower + (upper - lower) * (static_cast<double>(i) / static_cast<double>(intervals));
        p.edges_.front() = lower;
        p.edges_.back() = upper;
        return p;
    }

    /// `inner` lists the H-1 interior boundaries in increasing order.
    static FeaturePartition with_boundaries(std::vector<double> inner, double lower = 0.0, double upper = 1.0) {
        check_domain(lower, upper);
        FeaturePartition p;
        p.kind_ = FeatureKind::continuous;
        p.edges_.reserve(inner.size() + 2);
        p.edges_.push_back(lower);
        for (double b : inner) {
            if (!(b > p.edges_.back()) || !(b < upper))
                throw std::invalid_argument("partition boundaries must be strictly increasing inside the domain");
            p.edges_.push_back(b);
        }
        p.edges_.push_back(upper);
        return p;
    }

    /// Each group is one cell; e.g. {{0,1,2},{3,4}} puts quantities 0..2 in cell 1.
    static FeaturePartition discrete(std::vector<std::vector<double>> groups) {
        if (groups.empty()) throw std::invalid_argument("discrete partition needs at least one group");
        std::vector<double> seen;
        for (const auto& g : groups) {
            if (g.empty()) throw std::invalid_argument("discrete partition group is empty");
            for (double v : g) {
                if (std::find(seen.begin(), seen.end(), v) != seen.end())
                    throw std::invalid_argument("discrete value listed in more than one group");
                seen.push_back(v);
            }
        }
        FeaturePartition p;
        p.kind_ = FeatureKind::discrete;
        p.groups_ = std::move(groups);
        return p;
    }

    static FeaturePartition discrete_values(const std::vector<double>& values) {
        std::vector<std::vector<double>> groups;
        groups.reserve(values.size());
        for (double v : values) groups.push_back({v});
        return discrete(std::move(groups));
    }

    FeatureKind kind() const noexcept { return kind_; }
    bool is_uniform() const noexcept { return uniform_; }

    std::size_t size() const noexcept {
        return kind_ == FeatureKind::continuous ? edges_.size() - 1 : groups_.size();
    }

    double lower() const { return continuous_only().edges_.front(); }
    double upper() const { return continuous_only().edges_.back(); }

    /// Interval boundaries, H+1 values from lower to upper.
    std::span<const double> edges() const { return continuous_only().edges_; }
    const std::vector<std::vector<double>>& groups() const noexcept { return groups_; }

    /// 1-based index of the cell holding `value`.
    std::size_t bin(double value) const {
        if (kind_ == FeatureKind::discrete) {
            for (std::size_t h = 0; h < groups_.size(); ++h)
                if (std::find(groups_[h].begin(), groups_[h].end(), value) != groups_[h].end()) return h + 1;
            throw DomainError("value " + format(value) + " is not a declared discrete value");
        }
        if (!(value >= edges_.front() && value <= edges_.back()))
            throw DomainError("value " + format(value) + " outside [" + format(edges_.front()) + ", " +
                              format(edges_.back()) + "]");
        auto first_inner = edges_.begin() + 1;
        auto last_inner = edges_.end() - 1;
        return static_cast<std::size_t>(std::upper_bound(first_inner, last_inner, value) - first_inner) + 1;
    }

    friend bool operator==(const FeaturePartition&, const FeaturePartition&) = default;

private:
    FeaturePartition() = default;

    static void check_domain(double lower, double upper) {
        if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
            throw std::invalid_argument("feature domain must be a finite interval with lower < upper");
    }

    static std::string format(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }

    const FeaturePartition& continuous_only() const {
        if (kind_ != FeatureKind::continuous) throw std::logic_error("discrete feature has no interval edges");
        return *this;
    }

    FeatureKind kind_ = FeatureKind::continuous;
    bool uniform_ = false;
    std::vector<double> edges_;
    std::vector<std::vector<double>> groups_;
};

/// Per-feature partitions defining the condition grid H_1 x ... x H_K.
class PartitionScheme {
public:
    PartitionScheme() = default;

    explicit PartitionScheme(std::vector<FeaturePartition> features) : features_(std::move(features)) {
        if (features_.empty()) throw std::invalid_argument("partition scheme needs at least one feature");
        shape_.reserve(features_.size());
        for (const auto& f : features_) shape_.push_back(f.size());
    }

    /// K features over [0,1], each split into 2^b equal intervals.
    static PartitionScheme uniform(unsigned b, std::size_t feature_count) {
        if (b > 30) throw std::invalid_argument("partitioning parameter too large");
        std::vector<FeaturePartition> features(feature_count, FeaturePartition::uniform(std::size_t{1} << b));
        PartitionScheme scheme(std::move(features));
        scheme.dyadic_level_ = b;
        return scheme;
    }

    std::size_t feature_count() const noexcept { return features_.size(); }
    const FeaturePartition& feature(std::size_t k) const { return features_.at(k); }
    const std::vector<FeaturePartition>& features() const noexcept { return features_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t condition_count() const { return shape_volume(shape_); }
    std::optional<unsigned> dyadic_level() const noexcept { return dyadic_level_; }

    std::size_t bin_index(std::size_t feature_index, double value) const {
        if (feature_index >= features_.size())
            throw DomainError("feature index " + std::to_string(feature_index) + " out of range");
        return features_[feature_index].bin(value);
    }

    Condition condition_of(std::span<const double> item_features) const {
        if (item_features.size() != features_.size())
            throw ShapeError("item has " + std::to_string(item_features.size()) + " features, scheme expects " +
                             std::to_string(features_.size()));
        std::vector<std::size_t> index(features_.size());
        for (std::size_t k = 0; k < features_.size(); ++k) index[k] = features_[k].bin(item_features[k]);
        return Condition(std::move(index));
    }

    std::size_t flat_index(const Condition& h) const { return descpol::flat_index(shape_, h); }
    Condition condition_at(std::size_t flat) const { return descpol::condition_at(shape_, flat); }

    friend bool operator==(const PartitionScheme& a, const PartitionScheme& b) { return a.features_ == b.features_; }

private:
    std::vector<FeaturePartition> features_;
    std::vector<std::size_t> shape_;
    std::optional<unsigned> dyadic_level_;
};

inline PartitionScheme uniform_scheme(unsigned b, std::size_t feature_count) {
    return PartitionScheme::uniform(b, feature_count);
}

}  // namespace descpol
