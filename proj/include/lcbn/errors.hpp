#pragma once

#include <stdexcept>
#include <string>

namespace lcbn {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct CycleError : Error {
    explicit CycleError(const std::string& msg) : Error(msg) {}
};

struct IndexError : Error {
    explicit IndexError(const std::string& msg) : Error(msg) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& msg) : Error(msg) {}
};

struct MergedAttributesError : Error {
    explicit MergedAttributesError(const std::string& msg) : Error(msg) {}
};

struct MonotonicityError : Error {
    explicit MonotonicityError(const std::string& msg) : Error(msg) {}
};

struct RangeError : Error {
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct NotLinearError : Error {
    explicit NotLinearError(const std::string& msg) : Error(msg) {}
};

struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(msg) {}
};

}  // namespace lcbn
