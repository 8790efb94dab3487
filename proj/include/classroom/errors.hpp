//
//  errors.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace classroom {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller handed an operation something that violates its preconditions.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// An internal invariant of the pipeline did not hold.
class PipelineError : public Error {
public:
    using Error::Error;
};

class InfeasibleRoomError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class PackIncompleteError : public ConfigError {
public:
    PackIncompleteError(std::string message, std::vector<int> missing)
        : ConfigError(std::move(message)), missing_(std::move(missing)) {}
    const std::vector<int>& missing() const noexcept { return missing_; }

private:
    std::vector<int> missing_;
};

class MissingAzimuthError : public InvalidInput {
public:
    MissingAzimuthError(std::string message, int azimuth)
        : InvalidInput(std::move(message)), azimuth_(azimuth) {}
    int azimuth() const noexcept { return azimuth_; }

private:
    int azimuth_;
};

class DisjointnessError : public ConfigError {
public:
    DisjointnessError(std::string message, std::string speaker)
        : ConfigError(std::move(message)), speaker_(std::move(speaker)) {}
    const std::string& speaker() const noexcept { return speaker_; }

private:
    std::string speaker_;
};

class PoolExhaustedError : public PipelineError {
public:
    PoolExhaustedError(std::string message, std::string resumeToken = {})
        : PipelineError(std::move(message)), resumeToken_(std::move(resumeToken)) {}
    const std::string& resume_token() const noexcept { return resumeToken_; }

private:
    std::string resumeToken_;
};

} // namespace classroom
