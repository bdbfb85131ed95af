#ifndef KFWER_ERRORS_HPP
#define KFWER_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kfwer {

/// Precondition violated by an argument (k > s, alpha outside (0,1), ...).
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A data column has zero sample variance, so its studentized statistic is undefined.
class degenerate_column : public domain_error {
public:
    explicit degenerate_column(std::size_t column)
        : domain_error("column " + std::to_string(column) + " has zero sample variance"),
          column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Malformed input file (CSV data, scenario file).
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw domain_error(message);
}

} // namespace detail
} // namespace kfwer

#endif // KFWER_ERRORS_HPP
