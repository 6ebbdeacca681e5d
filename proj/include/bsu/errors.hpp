#pragma once

#include <stdexcept>
#include <string>

namespace bsu {

// Exit codes used by the CLI; library errors map onto these so scripted
// callers can distinguish bad input from precision trouble.
enum class errc : int {
    ok = 0,
    internal = 1,
    bad_config = 2,          // NotFundamental, NotReal, bad flags
    bad_arithmetic = 3,      // NotInert, Ramified, UnsupportedSmoothing, NotUnit, DomainError, NonSquare
    insufficient_precision = 4,  // InsufficientPrecision, PalindromyFailure
    exhausted = 5,           // PrecisionExhausted, LevelTooDeep, ModulusTooSmall
};

struct error : std::runtime_error {
    errc code;
    error(errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct not_fundamental_error : error {
    explicit not_fundamental_error(const std::string& m) : error(errc::bad_config, m) {}
};
struct not_real_error : error {
    explicit not_real_error(const std::string& m) : error(errc::bad_config, m) {}
};
struct not_inert_error : error {
    explicit not_inert_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};
struct ramified_error : error {
    explicit ramified_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};
struct unsupported_smoothing_error : error {
    explicit unsupported_smoothing_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};
struct level_too_deep_error : error {
    explicit level_too_deep_error(const std::string& m) : error(errc::exhausted, m) {}
};
struct not_unit_error : error {
    explicit not_unit_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};
struct domain_error : error {
    explicit domain_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};
struct precision_exhausted_error : error {
    explicit precision_exhausted_error(const std::string& m) : error(errc::exhausted, m) {}
};
struct insufficient_precision_error : error {
    explicit insufficient_precision_error(const std::string& m) : error(errc::insufficient_precision, m) {}
};
struct no_pure_p_denominator_error : error {
    explicit no_pure_p_denominator_error(const std::string& m) : error(errc::insufficient_precision, m) {}
};
struct palindromy_failure_error : error {
    explicit palindromy_failure_error(const std::string& m) : error(errc::insufficient_precision, m) {}
};
struct modulus_too_small_error : error {
    explicit modulus_too_small_error(const std::string& m) : error(errc::exhausted, m) {}
};
struct non_square_error : error {
    explicit non_square_error(const std::string& m) : error(errc::bad_arithmetic, m) {}
};

} // namespace bsu
