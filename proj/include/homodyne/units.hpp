#pragma once

#include <cmath>
#include <limits>

namespace homodyne::units {

inline double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

inline double ratio_to_db(double ratio) {
  if (ratio <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio);
}

inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_ratio(dbm); }
inline double watt_to_dbm(double watt) { return ratio_to_db(watt / 1e-3); }

}  // namespace homodyne::units
