#pragma once

#include <stdexcept>
#include <string>

namespace nds {

// Bad user input: malformed data, violated preconditions, illegal indices.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg, std::string field = {})
        : std::runtime_error(msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// A matrix that must be inverted is numerically rank deficient.
class conditioning_error : public std::runtime_error {
public:
    conditioning_error(const std::string& msg, double condition)
        : std::runtime_error(msg), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

// A truncated block operator D_m failed the solvability gate.
class solver_singular : public std::runtime_error {
public:
    solver_singular(const std::string& msg, int channel, double condition)
        : std::runtime_error(msg), channel_(channel), condition_(condition) {}
    int channel() const { return channel_; }
    double condition() const { return condition_; }

private:
    int channel_;
    double condition_;
};

// Randomized repair ran out of retries.
class adjustment_failed : public std::runtime_error {
public:
    adjustment_failed(const std::string& msg, double best_condition, int retries)
        : std::runtime_error(msg), best_condition_(best_condition), retries_(retries) {}
    double best_condition() const { return best_condition_; }
    int retries() const { return retries_; }

private:
    double best_condition_;
    int retries_;
};

// A certified internal identity failed; indicates a sign-convention regression.
class internal_consistency_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace nds
