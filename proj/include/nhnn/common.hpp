#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace nhnn {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Task { NodeClassification, HypergraphClassification };

using MatF = Mat<float>;
using MatD = Mat<double>;

// Error taxonomy shared across the library. Each category maps to a
// machine-parseable token used by the CLI on stderr.
struct Error : std::runtime_error {
    std::string category;
    Error(std::string cat, const std::string& msg)
        : std::runtime_error(cat + ": " + msg), category(std::move(cat)) {}
};

struct OutOfRangeIndex : Error {
    explicit OutOfRangeIndex(const std::string& msg) : Error("OutOfRangeIndex", msg) {}
};
struct DuplicatePair : Error {
    explicit DuplicatePair(const std::string& msg) : Error("DuplicatePair", msg) {}
};
struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error("ShapeMismatch", msg) {}
};
struct MalformedFile : Error {
    explicit MalformedFile(const std::string& msg) : Error("MalformedFile", msg) {}
};
struct VersionMismatch : Error {
    explicit VersionMismatch(const std::string& msg) : Error("VersionMismatch", msg) {}
};
struct DegenerateSpec : Error {
    explicit DegenerateSpec(const std::string& msg) : Error("DegenerateSpec", msg) {}
};
struct DivergenceDetected : Error {
    explicit DivergenceDetected(const std::string& msg) : Error("DivergenceDetected", msg) {}
};

}  // namespace nhnn
