#ifndef GRADCERT_LINALG_HPP_
#define GRADCERT_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace gradcert {

using Vector = std::vector<double>;
using ConstVectorView = std::span<const double>;

enum class Norm { l1, l2, linf };

inline std::string_view to_string(Norm n) {
  switch (n) {
    case Norm::l1:
      return "l1";
    case Norm::l2:
      return "l2";
    case Norm::linf:
      return "linf";
  }
  return "l2";
}

inline Norm norm_from_string(std::string_view s) {
  if (s == "l1") return Norm::l1;
  if (s == "l2") return Norm::l2;
  if (s == "linf") return Norm::linf;
  throw ArgumentError("unknown norm '" + std::string(s) + "' (expected l1, l2 or linf)");
}

inline void require_same_size(ConstVectorView a, ConstVectorView b, const char* what) {
  if (a.size() != b.size()) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

inline double dot(ConstVectorView a, ConstVectorView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstVectorView a) { return std::sqrt(dot(a, a)); }

inline double norm(ConstVectorView a, Norm n) {
  switch (n) {
    case Norm::l1: {
      double s = 0.0;
      for (double v : a) s += std::abs(v);
      return s;
    }
    case Norm::linf: {
      double m = 0.0;
      for (double v : a) m = std::max(m, std::abs(v));
      return m;
    }
    case Norm::l2:
      break;
  }
  return norm2(a);
}

inline Vector difference(ConstVectorView a, ConstVectorView b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

inline double distance(ConstVectorView a, ConstVectorView b, Norm n = Norm::l2) {
  return norm(difference(a, b), n);
}

inline bool all_finite(ConstVectorView a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gradcert

#endif  // GRADCERT_LINALG_HPP_
