// Copyright 2026 The tokcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tokcomp {

enum class ErrorCode {
    ShapeMismatch,
    NonFiniteValue,
    NegativeValue,
    InvalidRatio,
    BudgetExceedsFrame,
    CoverageGap,
    ScheduleMismatch,
    UnsupportedDtype,
    UnsupportedShape,
    CorruptHeader,
    ConfigConflict,
    InvalidConfig,
    InvalidSpec,
    EmptyHistogram,
    IoError,
    MissingInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Coarse grouping used by the CLI to pick an exit status.
enum class ErrorClass { Input, Config, Output };

ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), m_code(code) {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

}  // namespace tokcomp
