#pragma once

#include <stdexcept>
#include <string>

namespace risklab {

struct InvalidMatrix : std::runtime_error {
    explicit InvalidMatrix(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotSpd : std::runtime_error {
    explicit NotSpd(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotSymmetric : std::runtime_error {
    explicit NotSymmetric(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidParameter : std::runtime_error {
    explicit InvalidParameter(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidRegime : std::runtime_error {
    explicit InvalidRegime(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace risklab
