#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dforge::engine {

enum class EngineErrorClass {
    parse,
    unknown_relation,
    unknown_column,
    type_mismatch,
    strict_group_by,
    dialect_violation,
    unsupported_feature,
};

const char* engine_error_class_tag(EngineErrorClass c);

class EngineError : public std::runtime_error {
public:
    static constexpr std::size_t no_position = static_cast<std::size_t>(-1);

    EngineError(EngineErrorClass cls, std::string message, std::size_t position = no_position)
        : std::runtime_error(std::move(message)), cls_(cls), position_(position) {}

    EngineErrorClass error_class() const { return cls_; }
    std::size_t position() const { return position_; }

private:
    EngineErrorClass cls_;
    std::size_t position_;
};

// Raised when an execution deadline expires; the gateway turns it into a
// timeout report rather than an error class.
class ExecTimeout : public std::runtime_error {
public:
    ExecTimeout() : std::runtime_error("execution timed out") {}
};

}  // namespace dforge::engine
