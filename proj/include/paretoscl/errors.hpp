#pragma once

#include <stdexcept>
#include <string>

namespace paretoscl {

/// Base of every error the library throws. `kind()` is a stable short tag
/// used by the CLI and the Python layer.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), m_kind(std::move(kind)) {}

    const std::string& kind() const noexcept { return m_kind; }

private:
    std::string m_kind;
};

/// Bad or inconsistent configuration. Names the offending key when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::string key = {})
        : Error("config", what), m_key(std::move(key)) {}
    const std::string& key() const noexcept { return m_key; }

private:
    std::string m_key;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage", what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error("data", what) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema", what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error("contract", what) {}
};

class DegenerateEmbedding : public Error {
public:
    explicit DegenerateEmbedding(const std::string& what) : Error("degenerate-embedding", what) {}
};

class BatchShapeError : public Error {
public:
    explicit BatchShapeError(const std::string& what) : Error("batch-shape", what) {}
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long step) : Error("divergence", what), m_step(step) {}
    long step() const noexcept { return m_step; }

private:
    long m_step;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace paretoscl
