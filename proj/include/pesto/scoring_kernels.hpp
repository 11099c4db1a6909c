#pragma once

// Dense scoring kernels. Missing values are carried as quiet NaN so that
// a candidate-by-metric table maps directly onto one Eigen array.

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace pesto {

enum class Direction { higher_better, lower_better };

template <typename Scalar> using ColumnArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using TableArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar> constexpr Scalar missing_value() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

/// Presence mask: true where the entry is not NaN.
template <typename Derived> auto present_mask(const Eigen::ArrayBase<Derived> &values) {
  return values == values;
}

/// Min-max normalization over the present entries of one metric column.
///
/// (v - min) / (max - min), flipped to 1 - x for lower_better. When every
/// present entry is equal they all map to 0.5. Missing entries stay NaN.
template <typename Derived>
ColumnArray<typename Derived::Scalar> min_max_normalize(const Eigen::ArrayBase<Derived> &values,
                                                        Direction direction) {
  using Scalar = typename Derived::Scalar;
  const auto present = present_mask(values);
  ColumnArray<Scalar> out = ColumnArray<Scalar>::Constant(values.size(), missing_value<Scalar>());
  if (!present.any()) {
    return out;
  }
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Scalar lo = present.select(values, inf).minCoeff();
  const Scalar hi = present.select(values, -inf).maxCoeff();
  if (!(hi > lo)) {
    return present.select(ColumnArray<Scalar>::Constant(values.size(), Scalar(0.5)), out);
  }
  const ColumnArray<Scalar> scaled = (values - lo) / (hi - lo);
  if (direction == Direction::lower_better) {
    return present.select(Scalar(1) - scaled, out);
  }
  return present.select(scaled, out);
}

/// Column-wise min_max_normalize over a candidates-by-metrics table.
template <typename Derived, typename DirectionRange>
TableArray<typename Derived::Scalar> normalize_columns(const Eigen::ArrayBase<Derived> &table,
                                                       const DirectionRange &directions) {
  TableArray<typename Derived::Scalar> out(table.rows(), table.cols());
  Eigen::Index j = 0;
  for (const Direction d : directions) {
    out.col(j) = min_max_normalize(table.col(j), d);
    ++j;
  }
  return out;
}

/// Per-row weighted mean over present entries, with weights renormalized
/// to the entries each row actually has. Rows with nothing present are NaN.
template <typename Derived, typename WeightDerived>
ColumnArray<typename Derived::Scalar>
weighted_row_mean(const Eigen::ArrayBase<Derived> &table,
                  const Eigen::ArrayBase<WeightDerived> &weights) {
  using Scalar = typename Derived::Scalar;
  const auto present = present_mask(table);
  const TableArray<Scalar> mask = present.template cast<Scalar>();
  const TableArray<Scalar> filled = present.select(table, Scalar(0));
  const auto w = weights.matrix().transpose().array();
  const ColumnArray<Scalar> numerator = (filled.rowwise() * w).rowwise().sum();
  const ColumnArray<Scalar> denominator = (mask.rowwise() * w).rowwise().sum();
  return (denominator > Scalar(0))
      .select(numerator / denominator,
              ColumnArray<Scalar>::Constant(table.rows(), missing_value<Scalar>()));
}

} // namespace pesto
