#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace ccp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A T x d real-valued time series. Row t-1 holds the observation at time t;
/// public APIs index time from 1 to T.
class MultiSeries {
public:
    MultiSeries() = default;

    /// Throws InputError when empty or when any entry is not finite.
    explicit MultiSeries(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    /// Observation y_t for 1 <= t <= T.
    auto at(std::size_t t) const { return values_.row(static_cast<Eigen::Index>(t - 1)); }

    /// Rows for times [t_first, t_last], both inclusive.
    Matrix window(std::size_t t_first, std::size_t t_last) const;

    friend bool operator==(const MultiSeries& a, const MultiSeries& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Matrix values_;
};

} // namespace ccp
