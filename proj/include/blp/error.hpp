#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- linear algebra -------------------------------------------------------

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Numerical rank of a design fell below its column count.
class RankDeficient : public Error {
public:
    RankDeficient(std::vector<std::size_t> columns, std::vector<std::string> names = {});

    const std::vector<std::size_t>& columns() const noexcept { return columns_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::size_t> columns_;
    std::vector<std::string> names_;
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(std::size_t pivot);
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// ---- shares ---------------------------------------------------------------

/// Share arithmetic left the open interval (0, 1).
class ShareDomainError : public Error {
public:
    using Error::Error;
};

class OutsideShareNonPositive : public ShareDomainError {
public:
    using ShareDomainError::ShareDomainError;
};

class ZeroQuantity : public ShareDomainError {
public:
    using ShareDomainError::ShareDomainError;
};

// ---- estimation -----------------------------------------------------------

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InsufficientObservations : public Error {
public:
    using Error::Error;
};

class OrderConditionViolated : public Error {
public:
    OrderConditionViolated(std::size_t instruments, std::size_t endogenous);
};

class CollinearWithFixedEffects : public Error {
public:
    explicit CollinearWithFixedEffects(std::string column);
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class ExactlyIdentified : public Error {
public:
    ExactlyIdentified();
};

class MultipleEndogenous : public Error {
public:
    explicit MultipleEndogenous(std::size_t count);
};

// ---- data io --------------------------------------------------------------

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string column, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::string column_;
};

class DuplicateKey : public Error {
public:
    DuplicateKey(std::string unit, int period);
};

class DomainViolation : public Error {
public:
    DomainViolation(std::string column, std::size_t row, const std::string& reason);
    const std::string& column() const noexcept { return column_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string column_;
    std::size_t row_;
};

class UnknownKey : public Error {
public:
    explicit UnknownKey(const std::string& key);
};

class MissingRequired : public Error {
public:
    explicit MissingRequired(const std::string& field);
};

class UnknownColumn : public Error {
public:
    explicit UnknownColumn(std::string name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// ---- simulation -----------------------------------------------------------

class DegenerateShares : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

}  // namespace blp
