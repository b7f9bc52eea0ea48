#ifndef HEPI_COMMON_HPP
#define HEPI_COMMON_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <chrono>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hepi {

using real = double;

template <class Scalar = real>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2 = Point2<real>;
using Box2 = Eigen::AlignedBox<real, 2>;
using NodalField = Eigen::VectorXd;
using NodalVectors = Eigen::Matrix2Xd;

constexpr real kSecondsPerDay = 86400.0;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using Rng = std::mt19937_64;

/// Independent, reproducible stream derived from a run seed and a stream tag.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw in [0, 1) built from the raw generator bits (portable across
/// standard library implementations).
inline real uniform01(Rng& rng) { return static_cast<real>(rng() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Shortest decimal text that reads back to the same double.
std::string format_real(real v);

// Minimal CSV helpers. Fields never contain commas in our formats.
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);
real parse_real(std::string_view field, const std::string& source, std::size_t line);
long long parse_int(std::string_view field, const std::string& source, std::size_t line);

/// Calendar date (proleptic Gregorian), ISO `YYYY-MM-DD` on the wire.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : days_(d) {}
  static Date parse(std::string_view iso);
  std::string to_string() const;
  std::chrono::sys_days sys_days() const { return days_; }
  /// 0 = Monday ... 6 = Sunday.
  int iso_weekday_index() const;
  Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }
  friend long operator-(const Date& a, const Date& b) { return (a.days_ - b.days_).count(); }
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hepi

#endif  // HEPI_COMMON_HPP
