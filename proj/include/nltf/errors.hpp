#ifndef NLTF_ERRORS_HPP
#define NLTF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nltf {

// Error kinds map onto CLI exit codes: Config -> 2, Domain/Numeric -> 3, Cap -> 4.
enum class ErrorKind { Config, Domain, Numeric, Cap };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void fail_domain(const std::string& msg) { throw Error(ErrorKind::Domain, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { throw Error(ErrorKind::Numeric, msg); }
[[noreturn]] inline void fail_cap(const std::string& msg) { throw Error(ErrorKind::Cap, msg); }

// Parse errors carry the offending position in the source text.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position)
        : Error(ErrorKind::Config, msg + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

} // namespace nltf

#endif
