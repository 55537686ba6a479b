#ifndef GPSINDY_ERRORS_HPP
#define GPSINDY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpsindy {

/// Coarse failure categories; the CLI maps them to exit codes
/// (config -> 2, numeric -> 3, io -> 4).
enum class ErrorCategory { config, numeric, io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define GPSINDY_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what)                                 \
            : Error(ErrorCategory::Category, std::string(#Name ": ") + what) {} \
    }

GPSINDY_DEFINE_ERROR(ConfigError, config);
GPSINDY_DEFINE_ERROR(InvalidFraction, config);
GPSINDY_DEFINE_ERROR(InvalidFactor, config);

GPSINDY_DEFINE_ERROR(IoError, io);
GPSINDY_DEFINE_ERROR(ParseError, io);

GPSINDY_DEFINE_ERROR(InsufficientData, numeric);
GPSINDY_DEFINE_ERROR(InvalidTimestamps, numeric);
GPSINDY_DEFINE_ERROR(InvalidInput, numeric);
GPSINDY_DEFINE_ERROR(DegenerateColumn, numeric);
GPSINDY_DEFINE_ERROR(DimensionError, numeric);
GPSINDY_DEFINE_ERROR(IllConditioned, numeric);
GPSINDY_DEFINE_ERROR(OptimizationFailed, numeric);
GPSINDY_DEFINE_ERROR(IncompatibleLibrary, numeric);
GPSINDY_DEFINE_ERROR(Divergence, numeric);
GPSINDY_DEFINE_ERROR(DivergentModel, numeric);
GPSINDY_DEFINE_ERROR(EmptySample, numeric);

#undef GPSINDY_DEFINE_ERROR

} // namespace gpsindy

#endif // GPSINDY_ERRORS_HPP
