#pragma once

// Inverse-temperature schedules beta(t) with closed-form derivatives. Beyond
// t_final the schedule is held constant.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace annealmap {

struct LinearBeta {
  double beta0 = 0.0, beta1 = 0.0, t_final = 1.0;
};

/// beta(t) = beta0 * exp(rate * t).
struct ExponentialBeta {
  double beta0 = 0.0, rate = 0.0, t_final = 1.0;
};

/// beta(t) = log(t + t_offset) / (p N).
struct GemanGeman {
  double p = 1.0;
  int n = 1;
  double t_offset = 1.0;
  double t_final = 1.0;
};

class Schedule {
 public:
  using Variant = std::variant<LinearBeta, ExponentialBeta, GemanGeman>;

  Schedule(Variant v) : v_(v) { validate(); }  // NOLINT(google-explicit-constructor)

  static Schedule frozen(double beta, double t_final) {
    return Schedule(LinearBeta{beta, beta, t_final});
  }

  double t_final() const {
    return std::visit([](const auto& s) { return s.t_final; }, v_);
  }

  double beta(double t) const {
    const double tc = std::clamp(t, 0.0, t_final());
    return std::visit(
        [tc](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LinearBeta>)
            return s.beta0 + (s.beta1 - s.beta0) * tc / s.t_final;
          else if constexpr (std::is_same_v<T, ExponentialBeta>)
            return s.beta0 * std::exp(s.rate * tc);
          else
            return std::log(tc + s.t_offset) / (s.p * s.n);
        },
        v_);
  }

  double beta_dot(double t) const {
    if (t < 0.0 || t > t_final()) return 0.0;
    return std::visit(
        [t](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LinearBeta>)
            return (s.beta1 - s.beta0) / s.t_final;
          else if constexpr (std::is_same_v<T, ExponentialBeta>)
            return s.beta0 * s.rate * std::exp(s.rate * t);
          else
            return 1.0 / ((t + s.t_offset) * s.p * s.n);
        },
        v_);
  }

  const Variant& variant() const { return v_; }

  bool is_frozen() const {
    if (const auto* l = std::get_if<LinearBeta>(&v_)) return l->beta0 == l->beta1;
    if (const auto* e = std::get_if<ExponentialBeta>(&v_)) return e->rate == 0.0 || e->beta0 == 0.0;
    return false;
  }

  /// "linear:b0,b1,T" | "exp:b0,rate,T" | "geman:p,N,T[,t_offset]".
  static Schedule parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("schedule '" + text + "': expected kind:args");
    const std::string kind = text.substr(0, colon);
    std::vector<double> a;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        a.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw std::invalid_argument("schedule '" + text + "': bad number '" + item + "'");
      }
    }
    if (kind == "linear" && a.size() == 3) return Schedule(LinearBeta{a[0], a[1], a[2]});
    if (kind == "exp" && a.size() == 3) return Schedule(ExponentialBeta{a[0], a[1], a[2]});
    if (kind == "geman" && (a.size() == 3 || a.size() == 4)) {
      if (a[1] != std::round(a[1]))
        throw std::invalid_argument("schedule '" + text + "': N must be an integer");
      return Schedule(GemanGeman{a[0], static_cast<int>(a[1]), a.size() == 4 ? a[3] : 1.0, a[2]});
    }
    throw std::invalid_argument("schedule '" + text +
                                "': expected linear:b0,b1,T | exp:b0,rate,T | geman:p,N,T[,t0]");
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LinearBeta>)
            os << "linear:" << s.beta0 << "," << s.beta1 << "," << s.t_final;
          else if constexpr (std::is_same_v<T, ExponentialBeta>)
            os << "exp:" << s.beta0 << "," << s.rate << "," << s.t_final;
          else
            os << "geman:" << s.p << "," << s.n << "," << s.t_final << "," << s.t_offset;
        },
        v_);
    return os.str();
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if (!(s.t_final > 0.0) || !std::isfinite(s.t_final))
            throw std::invalid_argument("schedule: t_final must be positive");
          if constexpr (std::is_same_v<T, LinearBeta>) {
            if (!(s.beta0 >= 0.0) || !(s.beta1 >= s.beta0))
              throw std::invalid_argument("linear schedule: need 0 <= beta0 <= beta1");
          } else if constexpr (std::is_same_v<T, ExponentialBeta>) {
            if (!(s.beta0 >= 0.0) || !(s.rate >= 0.0))
              throw std::invalid_argument("exponential schedule: need beta0 >= 0, rate >= 0");
          } else {
            if (!(s.p > 0.0) || s.n < 1 || !(s.t_offset >= 1.0))
              throw std::invalid_argument("geman schedule: need p > 0, N >= 1, t_offset >= 1");
          }
        },
        v_);
  }

  Variant v_;
};

}  // namespace annealmap
