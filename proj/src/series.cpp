#include "ccp/series.hpp"

#include "ccp/error.hpp"

#include <string>

namespace ccp {

MultiSeries::MultiSeries(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw InputError("time series must have at least one row and one column");
    }
    if (!values_.allFinite()) {
        throw InputError("time series contains non-finite values");
    }
}

Matrix MultiSeries::window(std::size_t t_first, std::size_t t_last) const {
    if (t_first < 1 || t_last < t_first || t_last > length()) {
        throw InputError("window [" + std::to_string(t_first) + ", " + std::to_string(t_last) +
                         "] outside series of length " + std::to_string(length()));
    }
    return values_.middleRows(static_cast<Eigen::Index>(t_first - 1),
                              static_cast<Eigen::Index>(t_last - t_first + 1));
}

} // namespace ccp
